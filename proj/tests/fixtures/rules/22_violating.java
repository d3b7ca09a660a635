// api: ApplicationInfo.loadIcon
public class IconLoader extends Activity {
    Drawable iconFor(ApplicationInfo info, PackageManager cached) {
        Drawable icon = info.loadIcon(cached);
        if (icon == null) {
            icon = getPackageManager().getDefaultActivityIcon();
        }
        return icon;
    }
}
