// api: BufferedReader.readLine
String firstLine(BufferedReader reader) throws IOException {
    return reader.readLine();
}
