// api: FileChannel.write
try {
    FileChannel channel = new FileOutputStream("out.bin").getChannel();
    channel.write(ByteBuffer.wrap(data));
} catch (IOException e) {
    e.printStackTrace();
}
