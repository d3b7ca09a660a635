// api: File.createNewFile
try {
    File file = new File("config.txt");
    if (!file.exists()) {
        file.createNewFile();
    }
} catch (IOException e) {
    e.printStackTrace();
}
