String text = "Hello, World!";
PrintWriter writer = new PrintWriter("f.txt", true);
writer.write(text);
writer.close();
