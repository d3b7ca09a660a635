try {
    RandomAccessFile raf =
      new RandomAccessFile("/tmp/file.json", "rw");
    byte[] buffer = new byte[1024 * 1024];
    raf.write(buffer);
    raf.close();
} catch(Exception e) {...}
