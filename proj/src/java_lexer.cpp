#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "robustapi/java_ast.hpp"

namespace robustapi::java {

namespace {

constexpr std::array<std::string_view, 50> kKeywords = {
    "abstract", "assert",     "boolean",   "break",      "byte",      "case",
    "catch",    "char",       "class",     "const",      "continue",  "default",
    "do",       "double",     "else",      "enum",       "extends",   "final",
    "finally",  "float",      "for",       "goto",       "if",        "implements",
    "import",   "instanceof", "int",       "interface",  "long",      "native",
    "new",      "package",    "private",   "protected",  "public",    "return",
    "short",    "static",     "strictfp",  "super",      "switch",    "synchronized",
    "this",     "throw",      "throws",    "transient",  "try",       "void",
    "volatile", "while"};

// Longest first. '>' is always emitted alone (except ">=") so that nested
// generic closers like "List<List<T>>" survive; the parser glues shifts back.
constexpr std::array<std::string_view, 21> kMultiCharOps = {
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<"};

constexpr std::string_view kSingleOps = "+-*/%=<>!~?:&|^";
constexpr std::string_view kSeparators = "(){}[];,.@";

bool ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}
bool ident_part(unsigned char c) { return ident_start(c) || std::isdigit(c); }

void append_utf8(std::string& out, unsigned code) {
  if (code < 0x80) {
    out.push_back(static_cast<char>(code));
  } else if (code < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (code >> 6)));
    out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xE0 | (code >> 12)));
    out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (skip_trivia()) {
      out.push_back(next());
    }
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  bool at_end() const { return pos_ >= src_.size(); }

  // Returns false at end of input.
  bool skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') ++pos_;
      } else if (c == '/' && peek(1) == '*') {
        std::size_t start = pos_;
        auto close = src_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) {
          throw LexError("unterminated block comment", start);
        }
        pos_ = close + 2;
      } else {
        return true;
      }
    }
    return false;
  }

  Token make(TokenKind kind, std::size_t start) {
    Token t;
    t.kind = kind;
    t.span = {start, pos_};
    t.text = std::string(src_.substr(start, pos_ - start));
    t.value = t.text;
    return t;
  }

  Token next() {
    std::size_t start = pos_;
    auto c = static_cast<unsigned char>(peek());
    if (ident_start(c)) {
      while (!at_end() && ident_part(static_cast<unsigned char>(peek()))) ++pos_;
      Token t = make(TokenKind::Identifier, start);
      if (t.text == "true" || t.text == "false") {
        t.kind = TokenKind::BoolLiteral;
      } else if (t.text == "null") {
        t.kind = TokenKind::NullLiteral;
      } else if (is_keyword(t.text)) {
        t.kind = TokenKind::Keyword;
      }
      return t;
    }
    if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return number(start);
    }
    if (c == '"') return string_literal(start);
    if (c == '\'') return char_literal(start);
    for (auto op : kMultiCharOps) {
      if (src_.substr(pos_, op.size()) == op) {
        pos_ += op.size();
        bool sep = op == "..." || op == "::";
        return make(sep ? TokenKind::Separator : TokenKind::Operator, start);
      }
    }
    ++pos_;
    if (kSeparators.find(static_cast<char>(c)) != std::string_view::npos) {
      return make(TokenKind::Separator, start);
    }
    if (kSingleOps.find(static_cast<char>(c)) != std::string_view::npos) {
      return make(TokenKind::Operator, start);
    }
    return make(TokenKind::Error, start);
  }

  Token number(std::size_t start) {
    bool floating = false;
    auto digits = [&](auto pred) {
      while (!at_end() && (pred(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    };
    auto is_dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      pos_ += 2;
      digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else if (peek() == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
      pos_ += 2;
      digits([](unsigned char ch) { return ch == '0' || ch == '1'; });
    } else {
      digits(is_dec);
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        floating = true;
        ++pos_;
        digits(is_dec);
      } else if (peek() == '.' && !ident_start(static_cast<unsigned char>(peek(1))) &&
                 peek(1) != '.') {
        floating = true;  // "1." is a valid double literal
        ++pos_;
      }
      if (peek() == 'e' || peek() == 'E') {
        std::size_t save = pos_;
        ++pos_;
        if (peek() == '+' || peek() == '-') ++pos_;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
          floating = true;
          digits(is_dec);
        } else {
          pos_ = save;
        }
      }
    }
    char suffix = peek();
    if (suffix == 'f' || suffix == 'F' || suffix == 'd' || suffix == 'D') {
      floating = true;
      ++pos_;
    } else if (suffix == 'l' || suffix == 'L') {
      ++pos_;
    }
    return make(floating ? TokenKind::FloatLiteral : TokenKind::IntLiteral, start);
  }

  // Decodes one escape sequence starting at the backslash.
  void escape(std::string& out) {
    ++pos_;  // backslash
    char e = peek();
    switch (e) {
      case 'b': out += '\b'; ++pos_; return;
      case 't': out += '\t'; ++pos_; return;
      case 'n': out += '\n'; ++pos_; return;
      case 'f': out += '\f'; ++pos_; return;
      case 'r': out += '\r'; ++pos_; return;
      case 's': out += ' '; ++pos_; return;
      case '"': case '\'': case '\\': out += e; ++pos_; return;
      case 'u': {
        while (peek() == 'u') ++pos_;
        unsigned code = 0;
        for (int i = 0; i < 4 && std::isxdigit(static_cast<unsigned char>(peek())); ++i) {
          code = code * 16 + static_cast<unsigned>(std::stoi(std::string(1, peek()), nullptr, 16));
          ++pos_;
        }
        append_utf8(out, code);
        return;
      }
      default:
        if (e >= '0' && e <= '7') {
          unsigned code = 0;
          for (int i = 0; i < 3 && peek() >= '0' && peek() <= '7'; ++i) {
            code = code * 8 + static_cast<unsigned>(peek() - '0');
            ++pos_;
          }
          out += static_cast<char>(code);
          return;
        }
        // Unknown escape: keep it verbatim.
        out += '\\';
        if (!at_end()) out += src_[pos_++];
    }
  }

  Token string_literal(std::size_t start) {
    std::string value;
    if (src_.substr(pos_, 3) == "\"\"\"") {
      pos_ += 3;
      while (true) {
        if (at_end()) throw LexError("unterminated text block", start);
        if (src_.substr(pos_, 3) == "\"\"\"") {
          pos_ += 3;
          break;
        }
        if (peek() == '\\') {
          escape(value);
        } else {
          value += src_[pos_++];
        }
      }
    } else {
      ++pos_;
      while (true) {
        if (at_end() || peek() == '\n') throw LexError("unterminated string literal", start);
        if (peek() == '"') {
          ++pos_;
          break;
        }
        if (peek() == '\\') {
          escape(value);
        } else {
          value += src_[pos_++];
        }
      }
    }
    Token t = make(TokenKind::StringLiteral, start);
    t.value = std::move(value);
    return t;
  }

  Token char_literal(std::size_t start) {
    std::string value;
    ++pos_;
    while (true) {
      if (at_end() || peek() == '\n') throw LexError("unterminated char literal", start);
      if (peek() == '\'') {
        ++pos_;
        break;
      }
      if (peek() == '\\') {
        escape(value);
      } else {
        value += src_[pos_++];
      }
    }
    Token t = make(TokenKind::CharLiteral, start);
    t.value = std::move(value);
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace robustapi::java
