// api: ApplicationInfo.loadIcon
Drawable iconFor(PackageManager pm, String packageName) {
    try {
        ApplicationInfo info = pm.getApplicationInfo(packageName, 0);
        return info.loadIcon(pm);
    } catch (PackageManager.NameNotFoundException e) {
        return null;
    }
}
