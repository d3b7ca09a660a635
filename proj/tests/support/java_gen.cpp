#include "java_gen.hpp"

#include <random>

namespace robustapi::testing {

namespace {

enum Var { kWriter, kList, kIter, kFile, kMap, kTok, kIndex, kCatch, kElem };

class Gen {
 public:
  Gen(std::uint64_t seed, const std::vector<std::string>& names, int max_depth)
      : rng_(seed), names_(names), max_depth_(max_depth) {}

  std::string program() {
    std::string out;
    out += "PrintWriter " + n(kWriter) + " = new PrintWriter(\"out.txt\");\n";
    out += "List<String> " + n(kList) + " = new ArrayList<>();\n";
    out += "Iterator<String> " + n(kIter) + " = " + n(kList) + ".iterator();\n";
    out += "File " + n(kFile) + " = new File(\"data\");\n";
    out += "Map<String, Integer> " + n(kMap) + " = new HashMap<>();\n";
    out += "StringTokenizer " + n(kTok) + " = new StringTokenizer(\"a b\");\n";
    int count = 1 + pick(5);
    for (int i = 0; i < count; ++i) out += statement(0);
    return out;
  }

 private:
  int pick(int bound) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(bound)); }
  const std::string& n(Var v) const { return names_[v]; }
  std::string index(int depth) const { return n(kIndex) + std::to_string(depth); }

  std::string argument() {
    switch (pick(4)) {
      case 0: return "\"s\"";
      case 1: return n(kTok) + ".nextToken()";
      case 2: return n(kMap) + ".get(\"k\").toString()";
      default: return "text";
    }
  }

  std::string call() {
    switch (pick(16)) {
      case 0: return n(kWriter) + ".write(" + argument() + ");";
      case 1: return n(kWriter) + ".flush();";
      case 2: return n(kWriter) + ".close();";
      case 3: return n(kList) + ".add(" + argument() + ");";
      case 4: return "String v = " + n(kList) + ".get(0);";
      case 5: return "int size = " + n(kList) + ".size();";
      case 6: return n(kIter) + ".next();";
      case 7: return n(kFile) + ".mkdirs();";
      case 8: return n(kFile) + ".createNewFile();";
      case 9: return "Integer c = " + n(kMap) + ".get(\"k\");";
      case 10: return n(kMap) + ".put(\"k\", 1);";
      case 11: return n(kTok) + ".nextToken();";
      case 12: return "System.out.println(" + n(kList) + ".size());";
      case 13: return n(kWriter) + ".write(" + n(kList) + ".get(" + n(kList) + ".size() - 1));";
      case 14: return n(kMap) + ".get(" + n(kTok) + ".nextToken()).intValue();";
      default: return "log.info(\"step\");";
    }
  }

  std::string condition() {
    switch (pick(7)) {
      case 0: return n(kWriter) + " != null";
      case 1: return n(kFile) + ".exists()";
      case 2: return "!" + n(kFile) + ".exists()";
      case 3: return n(kList) + ".size() > 0";
      case 4: return n(kIter) + ".hasNext()";
      case 5: return n(kMap) + ".get(\"k\") != null && " + n(kTok) + ".hasMoreTokens()";
      default: return "flag";
    }
  }

  std::string block(int depth) {
    std::string out = "{\n";
    int count = pick(4);
    for (int i = 0; i < count; ++i) out += statement(depth + 1);
    return out + "}\n";
  }

  std::string statement(int depth) {
    int choice = depth >= max_depth_ ? 0 : pick(10);
    switch (choice) {
      case 4: {
        std::string out = "if (" + condition() + ") " + block(depth);
        if (pick(2)) out += "else " + block(depth);
        return out;
      }
      case 5: return "while (" + n(kIter) + ".hasNext()) " + block(depth);
      case 6: {
        std::string i = index(depth);
        return "for (int " + i + " = 0; " + i + " < " + n(kList) + ".size(); " + i + "++) " +
               block(depth);
      }
      case 7: return "for (String " + n(kElem) + " : " + n(kList) + ") " + block(depth);
      case 8: {
        static const char* types[] = {"IOException", "Exception", "RuntimeException"};
        std::string out = "try " + block(depth) + "catch (" + types[pick(3)] + " " + n(kCatch) +
                          ") " + block(depth);
        if (pick(2)) out += "finally " + block(depth);
        return out;
      }
      case 9: return "do " + block(depth) + "while (" + n(kTok) + ".hasMoreTokens());\n";
      default: return call() + "\n";
    }
  }

  std::mt19937_64 rng_;
  const std::vector<std::string>& names_;
  int max_depth_;
};

struct FlipTemplate {
  const char* api;
  std::vector<const char*> lines;
};

const std::vector<FlipTemplate>& flip_templates() {
  static const std::vector<FlipTemplate> t = {
      {"PrintWriter.write",
       {"PrintWriter pw = new PrintWriter(\"out.txt\");", "pw.write(\"line\");", "pw.close();"}},
      {"FileChannel.write",
       {"FileChannel ch = stream.getChannel();", "ch.write(buffer);", "ch.close();"}},
      {"RandomAccessFile.write",
       {"RandomAccessFile raf = new RandomAccessFile(\"f.bin\", \"rw\");", "raf.write(bytes);",
        "raf.close();"}},
      {"File.createNewFile", {"File target = new File(\"a.txt\");", "target.createNewFile();"}},
      {"JsonElement.getAsString",
       {"JsonElement el = obj.get(\"key\");", "if (el != null) { name = el.getAsString(); }"}},
      {"String.getBytes", {"String text = \"abc\";", "byte[] raw = text.getBytes(\"UTF-8\");"}},
      {"Cipher.init",
       {"Cipher cipher = Cipher.getInstance(\"AES\");", "cipher.init(Cipher.ENCRYPT_MODE, key);"}},
  };
  return t;
}

const std::vector<const char*>& fillers() {
  static const std::vector<const char*> f = {
      "log.info(\"step\");",
      "count++;",
      "if (flag) { log.warn(\"flag set\"); }",
      "for (int k = 0; k < 3; k++) { total += k; }",
      "String msg = \"m\" + count;",
      "while (queue.isEmpty()) { queue.poll(); }",
      "synchronized (lock) { count = 0; }",
  };
  return f;
}

}  // namespace

std::string random_program(std::uint64_t seed, const std::vector<std::string>& names,
                           int max_depth) {
  return Gen(seed, names, max_depth).program();
}

FlipCase random_flip_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t bound) { return static_cast<std::size_t>(rng() % bound); };
  const FlipTemplate& t = flip_templates()[pick(flip_templates().size())];

  std::string body;
  for (const char* line : t.lines) {
    std::size_t pad = pick(3);
    for (std::size_t i = 0; i < pad; ++i) {
      body += std::string(fillers()[pick(fillers().size())]) + "\n";
    }
    body += std::string(line) + "\n";
  }
  if (pick(2)) body += std::string(fillers()[pick(fillers().size())]) + "\n";

  static const char* catches[] = {"IOException", "Exception", "GeneralSecurityException",
                                  "RuntimeException"};
  FlipCase out;
  out.api = t.api;
  out.hoisted = body;
  out.wrapped = "try {\n" + body + "} catch (" + catches[pick(4)] + " e) {\n" +
                "e.printStackTrace();\n}\n";
  if (pick(2)) out.wrapped += "finally {\nlog.info(\"done\");\n}\n";
  return out;
}

}  // namespace robustapi::testing
