#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <utility>

#include "robustapi/java_ast.hpp"

namespace robustapi::java {

namespace {

constexpr std::array<std::string_view, 9> kPrimitiveTypes = {
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void"};

constexpr std::array<std::string_view, 13> kModifierKeywords = {
    "public",  "private",      "protected", "static",   "final",
    "abstract", "native",      "synchronized", "transient", "volatile",
    "strictfp", "default",     "const"};

constexpr std::array<std::string_view, 12> kAssignOps = {
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="};

const std::map<std::string, int, std::less<>>& binary_precedence() {
  static const std::map<std::string, int, std::less<>> table = {
      {"||", 1}, {"&&", 2}, {"|", 3},  {"^", 4},  {"&", 5},   {"==", 6},
      {"!=", 6}, {"<", 7},  {">", 7},  {"<=", 7}, {">=", 7},  {"instanceof", 7},
      {"<<", 8}, {">>", 8}, {">>>", 8}, {"+", 9}, {"-", 9},   {"*", 10},
      {"/", 10}, {"%", 10}};
  return table;
}

template <std::size_t N>
bool one_of(const std::array<std::string_view, N>& set, std::string_view s) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

bool is_primitive(std::string_view s) { return one_of(kPrimitiveTypes, s); }

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src), toks_(tokenize(src)) {
    eof_.kind = TokenKind::Error;
    eof_.span = {src.size(), src.size()};
  }

  AstNode compilation_unit() {
    AstNode unit;
    unit.kind = NodeKind::CompilationUnit;
    skip_package_and_imports();
    while (!at_end()) {
      if (accept_sep(";")) continue;
      std::size_t start = peek().span.begin;
      skip_modifiers();
      if (!at_type_keyword()) fail("expected type declaration", {"class", "interface", "enum"});
      unit.children.push_back(type_declaration(start));
    }
    unit.span = {0, src_.size()};
    return unit;
  }

  // --- classification helpers (token-level lookahead only) ---------------

  bool starts_with_type_declaration() {
    Mark m = mark();
    skip_package_and_imports();
    skip_modifiers();
    bool result = at_type_keyword();
    reset(m);
    return result;
  }

  bool starts_with_member_declaration() {
    Mark m = mark();
    skip_package_and_imports();
    bool member_modifier = false;
    while (true) {
      if (check_sep("@") && !peek(1).is(TokenKind::Keyword, "interface")) {
        member_modifier = member_modifier || peek(1).text == "Override";
        skip_annotation();
      } else if (peek().kind == TokenKind::Keyword && one_of(kModifierKeywords, peek().text) &&
                 !(peek().text == "synchronized" && peek(1).is(TokenKind::Separator, "("))) {
        member_modifier = member_modifier || peek().text != "final";
        advance();
      } else {
        break;
      }
    }
    bool result = member_modifier || check_op("<") || looks_like_method_header();
    reset(m);
    return result;
  }

 private:
  struct Mark {
    std::size_t pos;
    std::size_t last_end;
  };

  // --- token cursor -------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    return pos_ + k < toks_.size() ? toks_[pos_ + k] : eof_;
  }
  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& advance() {
    const Token& t = peek();
    if (t.kind == TokenKind::Error && !at_end()) {
      throw ParseError("unexpected character '" + t.text + "'", t.span.begin);
    }
    if (!at_end()) {
      last_end_ = t.span.end;
      ++pos_;
    }
    return t;
  }
  Mark mark() const { return {pos_, last_end_}; }
  void reset(Mark m) {
    pos_ = m.pos;
    last_end_ = m.last_end;
  }

  bool check_sep(std::string_view s, std::size_t k = 0) const {
    return peek(k).is(TokenKind::Separator, s);
  }
  bool check_op(std::string_view s, std::size_t k = 0) const {
    return peek(k).is(TokenKind::Operator, s);
  }
  bool check_kw(std::string_view s, std::size_t k = 0) const {
    return peek(k).is(TokenKind::Keyword, s);
  }
  bool check_ident(std::size_t k = 0) const { return peek(k).kind == TokenKind::Identifier; }
  bool check_ident(std::string_view s, std::size_t k = 0) const {
    return peek(k).is(TokenKind::Identifier, s);
  }
  bool adjacent(std::size_t k) const {
    return peek(k).span.end == peek(k + 1).span.begin;
  }

  bool accept_sep(std::string_view s) {
    if (!check_sep(s)) return false;
    advance();
    return true;
  }
  bool accept_op(std::string_view s) {
    if (!check_op(s)) return false;
    advance();
    return true;
  }
  bool accept_kw(std::string_view s) {
    if (!check_kw(s)) return false;
    advance();
    return true;
  }

  [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string found = at_end() ? "end of input" : "'" + t.text + "'";
    if (t.kind == TokenKind::Error && !at_end()) {
      throw ParseError("unexpected character '" + t.text + "'", t.span.begin, std::move(expected));
    }
    throw ParseError(what + ", found " + found, t.span.begin, std::move(expected));
  }

  void expect_sep(std::string_view s) {
    if (!accept_sep(s)) fail("expected '" + std::string(s) + "'", {std::string(s)});
  }
  void expect_op(std::string_view s) {
    if (!accept_op(s)) fail("expected '" + std::string(s) + "'", {std::string(s)});
  }
  void expect_kw(std::string_view s) {
    if (!accept_kw(s)) fail("expected '" + std::string(s) + "'", {std::string(s)});
  }
  std::string expect_ident() {
    if (!check_ident()) fail("expected identifier", {"identifier"});
    return advance().text;
  }

  AstNode make(NodeKind kind, std::size_t start) const {
    AstNode n;
    n.kind = kind;
    n.span = {start, std::max(start, last_end_)};
    return n;
  }
  void finish(AstNode& n) const { n.span.end = std::max(n.span.begin, last_end_); }

  // --- declarations -------------------------------------------------------

  void skip_package_and_imports() {
    while (true) {
      Mark m = mark();
      while (check_sep("@") && !check_kw("interface", 1)) skip_annotation();
      if (check_kw("package") || check_kw("import")) {
        while (!at_end() && !check_sep(";")) advance();
        expect_sep(";");
      } else {
        reset(m);
        return;
      }
    }
  }

  void skip_annotation() {
    expect_sep("@");
    expect_ident();
    while (check_sep(".") && check_ident(1)) {
      advance();
      advance();
    }
    if (check_sep("(")) skip_balanced("(", ")");
  }

  void skip_balanced(std::string_view open, std::string_view close) {
    int depth = 0;
    do {
      if (at_end()) fail("unbalanced '" + std::string(open) + "'", {std::string(close)});
      if (check_sep(open)) ++depth;
      if (check_sep(close)) --depth;
      advance();
    } while (depth > 0);
  }

  // Skips modifiers and annotations; returns true if any were present.
  bool skip_modifiers() {
    bool any = false;
    while (true) {
      if (check_sep("@") && !check_kw("interface", 1)) {
        skip_annotation();
      } else if (peek().kind == TokenKind::Keyword && one_of(kModifierKeywords, peek().text)) {
        advance();
      } else if (check_ident("sealed") || (check_ident("non") && check_op("-", 1))) {
        if (check_ident("non")) {
          advance();
          advance();
        }
        advance();
      } else {
        return any;
      }
      any = true;
    }
  }

  bool at_type_keyword() const {
    return check_kw("class") || check_kw("interface") || check_kw("enum") ||
           (check_sep("@") && check_kw("interface", 1)) ||
           (check_ident("record") && check_ident(1));
  }

  AstNode type_declaration(std::size_t start) {
    AstNode decl = make(NodeKind::ClassDecl, start);
    bool is_enum = false;
    bool is_record = false;
    if (accept_sep("@")) {
      expect_kw("interface");
    } else if (accept_kw("enum")) {
      is_enum = true;
    } else if (check_ident("record")) {
      advance();
      is_record = true;
    } else if (!accept_kw("class")) {
      expect_kw("interface");
    }
    decl.name = expect_ident();
    if (check_op("<")) skip_type_args_or_fail();
    if (is_record) {
      expect_sep("(");
      while (!check_sep(")")) {
        param();
        if (!accept_sep(",")) break;
      }
      expect_sep(")");
    }
    if (accept_kw("extends")) {
      decl.type_name = type();
      while (accept_sep(",")) type();
    }
    if (accept_kw("implements")) {
      type();
      while (accept_sep(",")) type();
    }
    if (check_ident("permits")) {
      advance();
      type();
      while (accept_sep(",")) type();
    }
    class_body(decl, is_enum);
    finish(decl);
    return decl;
  }

  void class_body(AstNode& owner, bool is_enum) {
    expect_sep("{");
    if (is_enum) enum_constants(owner);
    while (!check_sep("}")) {
      if (at_end()) fail("expected '}'", {"}"});
      if (accept_sep(";") || accept_sep("...")) continue;
      owner.children.push_back(member(owner.name));
    }
    expect_sep("}");
  }

  void enum_constants(AstNode& owner) {
    while (check_ident() || check_sep("@")) {
      std::size_t start = peek().span.begin;
      while (check_sep("@")) skip_annotation();
      AstNode field = make(NodeKind::FieldDecl, start);
      field.type_name = owner.name;
      AstNode decl = make(NodeKind::Declarator, peek().span.begin);
      decl.name = expect_ident();
      if (check_sep("(") || check_sep("{")) {
        AstNode creation = make(NodeKind::ObjectCreation, peek().span.begin);
        creation.type_name = owner.name;
        if (check_sep("(")) arguments(creation);
        if (check_sep("{")) {
          AstNode body = make(NodeKind::ClassDecl, peek().span.begin);
          class_body(body, false);
          finish(body);
          creation.children.push_back(std::move(body));
        }
        finish(creation);
        decl.children.push_back(std::move(creation));
      }
      finish(decl);
      field.children.push_back(std::move(decl));
      finish(field);
      owner.children.push_back(std::move(field));
      if (!accept_sep(",")) break;
    }
    accept_sep(";");
  }

  AstNode member(const std::string& class_name) {
    std::size_t start = peek().span.begin;
    bool had_modifiers = skip_modifiers();
    if (at_type_keyword()) return type_declaration(start);
    if (check_sep("{")) {
      AstNode init = block();
      init.span.begin = start;
      return init;
    }
    if (check_op("<")) skip_type_args_or_fail();
    // Constructor, or compact record constructor.
    if (check_ident() && check_sep("(", 1)) {
      AstNode method = make(NodeKind::MethodDecl, start);
      method.name = advance().text;
      method_rest(method);
      return method;
    }
    if (check_ident(class_name) && check_sep("{", 1)) {
      advance();
      AstNode init = block();
      init.span.begin = start;
      return init;
    }
    (void)had_modifiers;
    std::string declared = type();
    std::size_t name_start = peek().span.begin;
    std::string name = expect_ident();
    if (check_sep("(")) {
      AstNode method = make(NodeKind::MethodDecl, start);
      method.name = std::move(name);
      method.type_name = std::move(declared);
      method_rest(method);
      return method;
    }
    AstNode field = make(NodeKind::FieldDecl, start);
    field.type_name = declared;
    field.children.push_back(declarator_rest(std::move(name), name_start));
    while (accept_sep(",")) {
      std::size_t s = peek().span.begin;
      field.children.push_back(declarator_rest(expect_ident(), s));
    }
    expect_sep(";");
    finish(field);
    return field;
  }

  void method_rest(AstNode& method) {
    expect_sep("(");
    while (!check_sep(")")) {
      method.children.push_back(param());
      if (!accept_sep(",")) break;
    }
    expect_sep(")");
    while (check_sep("[")) {
      advance();
      expect_sep("]");
    }
    if (accept_kw("throws")) {
      type();
      while (accept_sep(",")) type();
    }
    if (check_sep("{")) {
      method.children.push_back(block());
    } else if (accept_kw("default")) {
      expression();
      expect_sep(";");
    } else {
      expect_sep(";");
    }
    finish(method);
  }

  AstNode param() {
    std::size_t start = peek().span.begin;
    skip_modifiers();
    AstNode p = make(NodeKind::Param, start);
    p.type_name = type();
    if (accept_sep("...")) p.type_name += "[]";
    if (accept_kw("this")) {
      p.name = "this";
    } else {
      p.name = expect_ident();
    }
    while (check_sep("[")) {
      advance();
      expect_sep("]");
      p.type_name += "[]";
    }
    finish(p);
    return p;
  }

  AstNode declarator_rest(std::string name, std::size_t start) {
    AstNode d = make(NodeKind::Declarator, start);
    d.name = std::move(name);
    while (check_sep("[")) {
      advance();
      expect_sep("]");
    }
    if (accept_op("=")) d.children.push_back(variable_initializer());
    finish(d);
    return d;
  }

  AstNode variable_initializer() {
    if (check_sep("{")) return array_initializer();
    return expression();
  }

  AstNode array_initializer() {
    AstNode init = make(NodeKind::ArrayInit, peek().span.begin);
    expect_sep("{");
    while (!check_sep("}")) {
      init.children.push_back(variable_initializer());
      if (!accept_sep(",")) break;
    }
    expect_sep("}");
    finish(init);
    return init;
  }

  // --- types --------------------------------------------------------------

  // Skips a generic argument/parameter list starting at '<'. Returns false
  // (without consuming) if the tokens cannot form one.
  bool skip_type_args() {
    if (!check_op("<")) return false;
    Mark m = mark();
    int depth = 0;
    while (!at_end()) {
      const Token& t = peek();
      if (t.is(TokenKind::Operator, "<")) {
        ++depth;
      } else if (t.is(TokenKind::Operator, ">")) {
        --depth;
        if (depth == 0) {
          advance();
          return true;
        }
      } else if (t.kind == TokenKind::Identifier ||
                 (t.kind == TokenKind::Keyword &&
                  (is_primitive(t.text) || t.text == "extends" || t.text == "super")) ||
                 t.is(TokenKind::Operator, "?") || t.is(TokenKind::Operator, "&") ||
                 t.is(TokenKind::Separator, ",") || t.is(TokenKind::Separator, ".") ||
                 t.is(TokenKind::Separator, "[") || t.is(TokenKind::Separator, "]") ||
                 t.is(TokenKind::Separator, "@")) {
        // part of the argument list
      } else {
        break;
      }
      advance();
    }
    reset(m);
    return false;
  }

  void skip_type_args_or_fail() {
    if (!skip_type_args()) fail("malformed type arguments", {">"});
  }

  std::optional<std::string> try_type() {
    Mark m = mark();
    while (check_sep("@")) {
      if (!check_ident(1)) {
        reset(m);
        return std::nullopt;
      }
      skip_annotation();
    }
    std::string name;
    if (peek().kind == TokenKind::Keyword && is_primitive(peek().text)) {
      name = advance().text;
    } else if (check_ident()) {
      name = advance().text;
      if (check_op("<") && !skip_type_args()) {
        reset(m);
        return std::nullopt;
      }
      while (check_sep(".") && (check_ident(1) || check_sep("@", 1))) {
        advance();
        while (check_sep("@")) skip_annotation();
        name = expect_ident();
        if (check_op("<") && !skip_type_args()) {
          reset(m);
          return std::nullopt;
        }
      }
    } else {
      reset(m);
      return std::nullopt;
    }
    while (check_sep("[") && check_sep("]", 1)) {
      advance();
      advance();
      name += "[]";
    }
    return name;
  }

  std::string type() {
    auto t = try_type();
    if (!t) fail("expected type", {"type"});
    return *t;
  }

  // --- statements ---------------------------------------------------------

  AstNode block() {
    AstNode b = make(NodeKind::Block, peek().span.begin);
    expect_sep("{");
    while (!check_sep("}")) {
      if (at_end()) fail("expected '}'", {"}"});
      b.children.push_back(statement());
    }
    expect_sep("}");
    finish(b);
    return b;
  }

  bool looks_like_local_class() {
    Mark m = mark();
    skip_modifiers();
    bool result = at_type_keyword();
    reset(m);
    return result;
  }

  bool looks_like_local_var() {
    Mark m = mark();
    skip_modifiers();
    bool result = false;
    if (check_ident("var") && check_ident(1)) {
      result = true;
    } else if (try_type() && check_ident()) {
      const Token& next = peek(1);
      result = next.is(TokenKind::Operator, "=") || next.is(TokenKind::Separator, ";") ||
               next.is(TokenKind::Separator, ",") || next.is(TokenKind::Separator, "[") ||
               next.is(TokenKind::Operator, ":");
    }
    reset(m);
    return result;
  }

  bool looks_like_method_header() {
    Mark m = mark();
    bool result = false;
    if (check_ident() && check_sep("(", 1)) {
      advance();
    } else if (!(try_type() && check_ident() && check_sep("(", 1))) {
      reset(m);
      return false;
    } else {
      advance();
    }
    try {
      skip_balanced("(", ")");
      while (check_sep("[") && check_sep("]", 1)) {
        advance();
        advance();
      }
      if (accept_kw("throws")) {
        while (!at_end() && !check_sep("{") && !check_sep(";")) advance();
      }
      result = check_sep("{");
    } catch (const ParseError&) {
      result = false;
    }
    reset(m);
    return result;
  }

  AstNode local_var_decl() {
    std::size_t start = peek().span.begin;
    skip_modifiers();
    AstNode decl = make(NodeKind::LocalVarDecl, start);
    if (check_ident("var") && check_ident(1)) {
      advance();
      decl.type_name = "var";
    } else {
      decl.type_name = type();
    }
    do {
      std::size_t s = peek().span.begin;
      decl.children.push_back(declarator_rest(expect_ident(), s));
    } while (accept_sep(","));
    finish(decl);
    return decl;
  }

  AstNode statement() {
    std::size_t start = peek().span.begin;
    const Token& t = peek();
    if (check_sep("{")) return block();
    if (check_sep(";") || check_sep("...")) {
      advance();
      return make(NodeKind::Empty, start);
    }
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "if") return if_statement();
      if (t.text == "while") return while_statement();
      if (t.text == "do") return do_statement();
      if (t.text == "for") return for_statement();
      if (t.text == "try") return try_statement();
      if (t.text == "switch" && check_sep("(", 1)) {
        AstNode s = switch_construct();
        accept_sep(";");
        finish(s);
        return s;
      }
      if (t.text == "return" || t.text == "throw") {
        AstNode s = make(t.text == "return" ? NodeKind::Return : NodeKind::Throw, start);
        advance();
        if (s.kind == NodeKind::Throw || !check_sep(";")) s.children.push_back(expression());
        expect_sep(";");
        finish(s);
        return s;
      }
      if (t.text == "break" || t.text == "continue") {
        AstNode s = make(t.text == "break" ? NodeKind::Break : NodeKind::Continue, start);
        advance();
        if (check_ident()) s.name = advance().text;
        expect_sep(";");
        finish(s);
        return s;
      }
      if (t.text == "synchronized" && check_sep("(", 1)) {
        AstNode s = make(NodeKind::Synchronized, start);
        advance();
        expect_sep("(");
        s.children.push_back(expression());
        expect_sep(")");
        s.children.push_back(block());
        finish(s);
        return s;
      }
      if (t.text == "assert") {
        AstNode s = make(NodeKind::ExpressionStmt, start);
        s.name = "assert";
        advance();
        s.children.push_back(expression());
        if (accept_op(":")) s.children.push_back(expression());
        expect_sep(";");
        finish(s);
        return s;
      }
    }
    if (check_ident("yield") && !check_op("=", 1) && !check_sep("(", 1) && !check_sep(".", 1)) {
      AstNode s = make(NodeKind::Return, start);
      s.name = "yield";
      advance();
      s.children.push_back(expression());
      expect_sep(";");
      finish(s);
      return s;
    }
    if (check_ident() && check_op(":", 1)) {
      AstNode s = make(NodeKind::Labeled, start);
      s.name = advance().text;
      advance();
      s.children.push_back(statement());
      finish(s);
      return s;
    }
    if (looks_like_local_class()) {
      std::size_t s = peek().span.begin;
      skip_modifiers();
      return type_declaration(s);
    }
    if (looks_like_local_var()) {
      AstNode decl = local_var_decl();
      expect_sep(";");
      finish(decl);
      return decl;
    }
    AstNode s = make(NodeKind::ExpressionStmt, start);
    AstNode e = expression();
    bool valid = e.kind == NodeKind::Assignment || e.kind == NodeKind::MethodCall ||
                 e.kind == NodeKind::ObjectCreation ||
                 (e.kind == NodeKind::UnaryOp &&
                  (e.name == "++" || e.name == "--" || e.name == "x++" || e.name == "x--"));
    if (!valid) {
      throw ParseError("not a statement", e.span.begin, {"statement"});
    }
    s.children.push_back(std::move(e));
    expect_sep(";");
    finish(s);
    return s;
  }

  AstNode parenthesized() {
    expect_sep("(");
    AstNode e = expression();
    expect_sep(")");
    return e;
  }

  AstNode if_statement() {
    AstNode s = make(NodeKind::If, peek().span.begin);
    expect_kw("if");
    s.children.push_back(parenthesized());
    s.children.push_back(statement());
    if (accept_kw("else")) s.children.push_back(statement());
    finish(s);
    return s;
  }

  AstNode while_statement() {
    AstNode s = make(NodeKind::While, peek().span.begin);
    expect_kw("while");
    s.children.push_back(parenthesized());
    s.children.push_back(statement());
    finish(s);
    return s;
  }

  AstNode do_statement() {
    AstNode s = make(NodeKind::DoWhile, peek().span.begin);
    expect_kw("do");
    s.children.push_back(statement());
    expect_kw("while");
    s.children.push_back(parenthesized());
    expect_sep(";");
    finish(s);
    return s;
  }

  bool looks_like_enhanced_for() {
    Mark m = mark();
    skip_modifiers();
    bool result = false;
    if (check_ident("var") && check_ident(1)) {
      result = check_op(":", 2);
    } else if (try_type() && check_ident()) {
      result = check_op(":", 1);
    }
    reset(m);
    return result;
  }

  AstNode for_statement() {
    std::size_t start = peek().span.begin;
    expect_kw("for");
    expect_sep("(");
    if (looks_like_enhanced_for()) {
      AstNode s = make(NodeKind::EnhancedFor, start);
      std::size_t vstart = peek().span.begin;
      skip_modifiers();
      AstNode var = make(NodeKind::LocalVarDecl, vstart);
      if (check_ident("var") && check_ident(1)) {
        advance();
        var.type_name = "var";
      } else {
        var.type_name = type();
      }
      AstNode d = make(NodeKind::Declarator, peek().span.begin);
      d.name = expect_ident();
      finish(d);
      var.children.push_back(std::move(d));
      finish(var);
      s.children.push_back(std::move(var));
      expect_op(":");
      s.children.push_back(expression());
      expect_sep(")");
      s.children.push_back(statement());
      finish(s);
      return s;
    }
    AstNode s = make(NodeKind::For, start);
    AstNode init = make(NodeKind::List, peek().span.begin);
    if (!check_sep(";")) {
      if (looks_like_local_var()) {
        init.children.push_back(local_var_decl());
      } else {
        do {
          init.children.push_back(expression());
        } while (accept_sep(","));
      }
    }
    finish(init);
    expect_sep(";");
    AstNode cond = make(NodeKind::Empty, peek().span.begin);
    if (!check_sep(";")) cond = expression();
    expect_sep(";");
    AstNode update = make(NodeKind::List, peek().span.begin);
    if (!check_sep(")")) {
      do {
        update.children.push_back(expression());
      } while (accept_sep(","));
    }
    finish(update);
    expect_sep(")");
    s.children.push_back(std::move(init));
    s.children.push_back(std::move(cond));
    s.children.push_back(std::move(update));
    s.children.push_back(statement());
    finish(s);
    return s;
  }

  AstNode try_statement() {
    AstNode s = make(NodeKind::Try, peek().span.begin);
    expect_kw("try");
    bool has_resources = false;
    if (accept_sep("(")) {
      has_resources = true;
      while (!check_sep(")")) {
        std::size_t rstart = peek().span.begin;
        AstNode r = make(NodeKind::Resource, rstart);
        if (looks_like_local_var()) {
          skip_modifiers();
          if (check_ident("var") && check_ident(1)) {
            advance();
            r.type_name = "var";
          } else {
            r.type_name = type();
          }
          r.name = expect_ident();
          expect_op("=");
          r.children.push_back(expression());
        } else {
          r.children.push_back(expression());
        }
        finish(r);
        s.children.push_back(std::move(r));
        if (!accept_sep(";")) break;
      }
      expect_sep(")");
    }
    s.children.push_back(block());
    bool handled = false;
    while (check_kw("catch")) {
      handled = true;
      AstNode c = make(NodeKind::Catch, peek().span.begin);
      advance();
      expect_sep("(");
      skip_modifiers();
      c.type_name = type();
      while (accept_op("|")) c.type_name += "|" + type();
      c.name = expect_ident();
      expect_sep(")");
      c.children.push_back(block());
      finish(c);
      s.children.push_back(std::move(c));
    }
    if (check_kw("finally")) {
      handled = true;
      AstNode f = make(NodeKind::Finally, peek().span.begin);
      advance();
      f.children.push_back(block());
      finish(f);
      s.children.push_back(std::move(f));
    }
    if (!handled && !has_resources) fail("expected 'catch' or 'finally'", {"catch", "finally"});
    finish(s);
    return s;
  }

  // Used both as a statement and as an expression.
  AstNode switch_construct() {
    AstNode s = make(NodeKind::Switch, peek().span.begin);
    expect_kw("switch");
    s.children.push_back(parenthesized());
    expect_sep("{");
    while (!check_sep("}")) {
      if (at_end()) fail("expected '}'", {"}"});
      AstNode c = make(NodeKind::SwitchCase, peek().span.begin);
      AstNode labels = make(NodeKind::List, peek().span.begin);
      if (accept_kw("default")) {
        labels.name = "default";
      } else {
        expect_kw("case");
        do {
          if (check_kw("default")) {
            advance();
          } else {
            labels.children.push_back(conditional());
          }
        } while (accept_sep(","));
      }
      finish(labels);
      c.children.push_back(std::move(labels));
      if (accept_op("->")) {
        if (check_sep("{")) {
          c.children.push_back(block());
        } else if (check_kw("throw")) {
          c.children.push_back(statement());
        } else {
          AstNode es = make(NodeKind::ExpressionStmt, peek().span.begin);
          es.children.push_back(expression());
          expect_sep(";");
          finish(es);
          c.children.push_back(std::move(es));
        }
      } else {
        if (!accept_op(":")) fail("expected ':' or '->'", {":", "->"});
        while (!check_kw("case") && !check_kw("default") && !check_sep("}")) {
          if (at_end()) fail("expected '}'", {"}"});
          c.children.push_back(statement());
        }
      }
      finish(c);
      s.children.push_back(std::move(c));
    }
    expect_sep("}");
    finish(s);
    return s;
  }

  // --- expressions --------------------------------------------------------

  bool lambda_ahead() const {
    if (check_ident() && check_op("->", 1)) return true;
    if (!check_sep("(")) return false;
    int depth = 0;
    for (std::size_t k = 0; pos_ + k < toks_.size(); ++k) {
      const Token& t = peek(k);
      if (t.is(TokenKind::Separator, "(")) ++depth;
      if (t.is(TokenKind::Separator, ")") && --depth == 0) {
        return check_op("->", k + 1);
      }
      if (t.is(TokenKind::Separator, ";") || t.is(TokenKind::Separator, "{")) return false;
    }
    return false;
  }

  AstNode lambda() {
    AstNode l = make(NodeKind::Lambda, peek().span.begin);
    if (check_ident()) {
      AstNode p = make(NodeKind::Param, peek().span.begin);
      p.name = advance().text;
      finish(p);
      l.children.push_back(std::move(p));
    } else {
      expect_sep("(");
      while (!check_sep(")")) {
        if (check_ident() && (check_sep(",", 1) || check_sep(")", 1))) {
          AstNode p = make(NodeKind::Param, peek().span.begin);
          p.name = advance().text;
          finish(p);
          l.children.push_back(std::move(p));
        } else {
          l.children.push_back(param());
        }
        if (!accept_sep(",")) break;
      }
      expect_sep(")");
    }
    expect_op("->");
    if (check_sep("{")) {
      l.children.push_back(block());
    } else {
      l.children.push_back(expression());
    }
    finish(l);
    return l;
  }

  AstNode expression() {
    if (lambda_ahead()) return lambda();
    return assignment();
  }

  // Returns the operator spelled by the tokens at the cursor, gluing the
  // separately lexed '>' characters back into shifts.
  std::pair<std::string, std::size_t> peek_operator() const {
    const Token& t = peek();
    if (t.is(TokenKind::Keyword, "instanceof")) return {"instanceof", 1};
    if (t.kind != TokenKind::Operator) return {"", 0};
    if (t.text == ">") {
      if (adjacent(0) && check_op(">", 1)) {
        if (adjacent(1) && check_op(">", 2)) return {">>>", 3};
        if (adjacent(1) && check_op(">=", 2)) return {">>>=", 3};
        return {">>", 2};
      }
      if (adjacent(0) && check_op(">=", 1)) return {">>=", 2};
    }
    return {t.text, 1};
  }

  AstNode assignment() {
    std::size_t start = peek().span.begin;
    AstNode lhs = conditional();
    auto [op, n] = peek_operator();
    if (n > 0 && one_of(kAssignOps, op)) {
      for (std::size_t i = 0; i < n; ++i) advance();
      AstNode a = make(NodeKind::Assignment, start);
      a.name = op;
      a.children.push_back(std::move(lhs));
      a.children.push_back(expression());
      finish(a);
      return a;
    }
    return lhs;
  }

  AstNode conditional() {
    std::size_t start = peek().span.begin;
    AstNode cond = binary(1);
    if (!accept_op("?")) return cond;
    AstNode c = make(NodeKind::Conditional, start);
    c.children.push_back(std::move(cond));
    c.children.push_back(expression());
    expect_op(":");
    c.children.push_back(lambda_ahead() ? lambda() : conditional());
    finish(c);
    return c;
  }

  AstNode binary(int min_prec) {
    std::size_t start = peek().span.begin;
    AstNode lhs = unary();
    while (true) {
      auto [op, n] = peek_operator();
      if (n == 0) break;
      const auto& table = binary_precedence();
      auto it = table.find(op);
      if (it == table.end() || it->second < min_prec) break;
      for (std::size_t i = 0; i < n; ++i) advance();
      if (op == "instanceof") {
        AstNode node = make(NodeKind::InstanceOf, start);
        accept_kw("final");
        node.type_name = type();
        if (check_ident()) node.name = advance().text;
        node.children.push_back(std::move(lhs));
        finish(node);
        lhs = std::move(node);
        continue;
      }
      AstNode rhs = binary(it->second + 1);
      AstNode node = make(NodeKind::BinaryOp, start);
      node.name = op;
      node.children.push_back(std::move(lhs));
      node.children.push_back(std::move(rhs));
      finish(node);
      lhs = std::move(node);
    }
    return lhs;
  }

  bool cast_ahead() {
    if (!check_sep("(")) return false;
    Mark m = mark();
    advance();
    auto t = try_type();
    while (t && accept_op("&")) {
      if (!try_type()) t.reset();
    }
    bool result = false;
    if (t && check_sep(")")) {
      advance();
      const Token& next = peek();
      std::string base = t->substr(0, t->find('['));
      if (is_primitive(base)) {
        result = !at_end() && !next.is(TokenKind::Separator, ")") &&
                 !next.is(TokenKind::Separator, ";") && !next.is(TokenKind::Separator, ".") &&
                 !(next.kind == TokenKind::Operator && next.text != "+" && next.text != "-" &&
                   next.text != "!" && next.text != "~" && next.text != "++" && next.text != "--");
      } else {
        result = next.kind == TokenKind::Identifier || next.kind == TokenKind::StringLiteral ||
                 next.kind == TokenKind::CharLiteral || next.kind == TokenKind::IntLiteral ||
                 next.kind == TokenKind::FloatLiteral || next.kind == TokenKind::BoolLiteral ||
                 next.kind == TokenKind::NullLiteral || next.is(TokenKind::Separator, "(") ||
                 next.is(TokenKind::Operator, "!") || next.is(TokenKind::Operator, "~") ||
                 next.is(TokenKind::Keyword, "this") || next.is(TokenKind::Keyword, "super") ||
                 next.is(TokenKind::Keyword, "new") || next.is(TokenKind::Keyword, "switch");
      }
    }
    reset(m);
    return result;
  }

  AstNode unary() {
    std::size_t start = peek().span.begin;
    const Token& t = peek();
    if (t.kind == TokenKind::Operator &&
        (t.text == "+" || t.text == "-" || t.text == "++" || t.text == "--" || t.text == "!" ||
         t.text == "~")) {
      AstNode u = make(NodeKind::UnaryOp, start);
      u.name = advance().text;
      u.children.push_back(unary());
      finish(u);
      return u;
    }
    if (cast_ahead()) {
      AstNode c = make(NodeKind::Cast, start);
      advance();
      c.type_name = type();
      while (accept_op("&")) type();
      expect_sep(")");
      c.children.push_back(lambda_ahead() ? lambda() : unary());
      finish(c);
      return c;
    }
    AstNode e = selectors(primary(), start);
    while (check_op("++") || check_op("--")) {
      AstNode u = make(NodeKind::UnaryOp, start);
      u.name = "x" + advance().text;
      u.children.push_back(std::move(e));
      finish(u);
      e = std::move(u);
    }
    return e;
  }

  void arguments(AstNode& call) {
    expect_sep("(");
    while (!check_sep(")")) {
      call.children.push_back(expression());
      ++call.arg_count;
      if (!accept_sep(",")) {
        if (!check_sep(")")) fail("expected ',' or ')'", {",", ")"});
        break;
      }
    }
    expect_sep(")");
  }

  AstNode literal(LiteralKind kind) {
    AstNode n = make(NodeKind::Literal, peek().span.begin);
    n.literal = kind;
    n.name = advance().value;
    finish(n);
    return n;
  }

  AstNode primary() {
    std::size_t start = peek().span.begin;
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::IntLiteral: return literal(LiteralKind::Integer);
      case TokenKind::FloatLiteral: return literal(LiteralKind::Floating);
      case TokenKind::StringLiteral: return literal(LiteralKind::String);
      case TokenKind::CharLiteral: return literal(LiteralKind::Char);
      case TokenKind::BoolLiteral: return literal(LiteralKind::Boolean);
      case TokenKind::NullLiteral: return literal(LiteralKind::Null);
      default: break;
    }
    if (check_sep("(")) {
      advance();
      AstNode inner = expression();
      expect_sep(")");
      return inner;
    }
    if (check_kw("new")) return creator();
    if (check_kw("switch")) return switch_construct();
    if (check_kw("this") || check_kw("super")) {
      bool is_this = t.text == "this";
      advance();
      if (check_sep("(")) {
        AstNode call = make(NodeKind::MethodCall, start);
        call.name = is_this ? "this" : "super";
        arguments(call);
        finish(call);
        return call;
      }
      AstNode n = make(is_this ? NodeKind::This : NodeKind::Super, start);
      finish(n);
      return n;
    }
    if (t.kind == TokenKind::Keyword && is_primitive(t.text)) {
      AstNode n = make(NodeKind::ClassLiteral, start);
      n.type_name = advance().text;
      while (check_sep("[") && check_sep("]", 1)) {
        advance();
        advance();
        n.type_name += "[]";
      }
      if (accept_sep("::")) {
        n.kind = NodeKind::MethodRef;
        expect_kw("new");
        n.name = "new";
      } else {
        expect_sep(".");
        expect_kw("class");
      }
      finish(n);
      return n;
    }
    if (check_ident()) {
      std::string name = advance().text;
      if (check_sep("(")) {
        AstNode call = make(NodeKind::MethodCall, start);
        call.name = std::move(name);
        arguments(call);
        finish(call);
        return call;
      }
      AstNode n = make(NodeKind::Name, start);
      n.name = std::move(name);
      // Generic type used in a method reference: List<String>::new
      if (check_op("<")) {
        Mark m = mark();
        if (skip_type_args() && check_sep("::")) {
          finish(n);
          return n;
        }
        reset(m);
      }
      finish(n);
      return n;
    }
    fail("expected expression", {"expression"});
  }

  AstNode creator() {
    std::size_t start = peek().span.begin;
    expect_kw("new");
    if (check_op("<")) skip_type_args_or_fail();
    while (check_sep("@")) skip_annotation();
    std::string name;
    if (peek().kind == TokenKind::Keyword && is_primitive(peek().text)) {
      name = advance().text;
    } else {
      name = expect_ident();
      if (check_op("<")) skip_type_args_or_fail();
      while (accept_sep(".")) {
        while (check_sep("@")) skip_annotation();
        name = expect_ident();
        if (check_op("<")) skip_type_args_or_fail();
      }
    }
    if (check_sep("[")) {
      AstNode arr = make(NodeKind::ArrayCreation, start);
      std::string type_name = name;
      while (check_sep("[")) {
        advance();
        if (!check_sep("]")) arr.children.push_back(expression());
        expect_sep("]");
        type_name += "[]";
      }
      arr.type_name = type_name;
      if (check_sep("{")) arr.children.push_back(array_initializer());
      finish(arr);
      return arr;
    }
    AstNode obj = make(NodeKind::ObjectCreation, start);
    obj.type_name = name;
    arguments(obj);
    if (check_sep("{")) {
      AstNode body = make(NodeKind::ClassDecl, peek().span.begin);
      body.type_name = name;
      class_body(body, false);
      finish(body);
      obj.children.push_back(std::move(body));
    }
    finish(obj);
    return obj;
  }

  AstNode selectors(AstNode e, std::size_t start) {
    while (true) {
      if (check_sep(".")) {
        advance();
        if (check_op("<")) skip_type_args_or_fail();
        if (check_kw("new")) {
          AstNode inner = creator();
          inner.span.begin = start;
          e = std::move(inner);
          continue;
        }
        if (check_kw("class")) {
          advance();
          AstNode n = make(NodeKind::ClassLiteral, start);
          n.type_name = e.name;
          finish(n);
          e = std::move(n);
          continue;
        }
        if (check_kw("this") || check_kw("super")) {
          bool is_this = peek().text == "this";
          advance();
          AstNode n = make(is_this ? NodeKind::This : NodeKind::Super, start);
          n.name = e.name;
          finish(n);
          e = std::move(n);
          continue;
        }
        std::string name = expect_ident();
        if (check_sep("(")) {
          AstNode call = make(NodeKind::MethodCall, start);
          call.name = std::move(name);
          call.has_receiver = true;
          call.children.push_back(std::move(e));
          arguments(call);
          finish(call);
          e = std::move(call);
        } else {
          AstNode fa = make(NodeKind::FieldAccess, start);
          fa.name = std::move(name);
          fa.children.push_back(std::move(e));
          finish(fa);
          e = std::move(fa);
        }
      } else if (check_sep("[")) {
        if (check_sep("]", 1)) {
          // Array type in expression position: String[]::new / String[].class
          std::string type_name = e.name;
          while (check_sep("[") && check_sep("]", 1)) {
            advance();
            advance();
            type_name += "[]";
          }
          AstNode n = make(NodeKind::ClassLiteral, start);
          n.type_name = type_name;
          if (accept_sep("::")) {
            n.kind = NodeKind::MethodRef;
            expect_kw("new");
            n.name = "new";
          } else {
            expect_sep(".");
            expect_kw("class");
          }
          finish(n);
          e = std::move(n);
          continue;
        }
        advance();
        AstNode access = make(NodeKind::ArrayAccess, start);
        access.children.push_back(std::move(e));
        access.children.push_back(expression());
        expect_sep("]");
        finish(access);
        e = std::move(access);
      } else if (check_sep("::")) {
        advance();
        AstNode ref = make(NodeKind::MethodRef, start);
        if (check_op("<")) skip_type_args_or_fail();
        if (accept_kw("new")) {
          ref.name = "new";
        } else {
          ref.name = expect_ident();
        }
        ref.children.push_back(std::move(e));
        finish(ref);
        e = std::move(ref);
      } else {
        return e;
      }
    }
  }

  std::string_view src_;
  std::vector<Token> toks_;
  Token eof_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
};

constexpr std::string_view kMethodPrefix = "class __Harness { ";
constexpr std::string_view kMethodSuffix = "\n}";
constexpr std::string_view kStatementPrefix = "class __Harness { void __run() { ";
constexpr std::string_view kStatementSuffix = "\n} }";
constexpr std::string_view kExpressionPrefix = "class __Harness { Object __eval() { return ";
constexpr std::string_view kExpressionSuffix = "\n; } }";

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

// Replaces leading package/import declarations with spaces (newlines kept).
std::string blank_imports(std::string_view text) {
  std::string out(text);
  std::vector<Token> toks;
  try {
    toks = tokenize(text);
  } catch (const LexError&) {
    return out;
  }
  std::size_t i = 0;
  while (i < toks.size() &&
         (toks[i].is(TokenKind::Keyword, "import") || toks[i].is(TokenKind::Keyword, "package"))) {
    std::size_t j = i;
    while (j < toks.size() && !toks[j].is(TokenKind::Separator, ";")) ++j;
    if (j == toks.size()) break;
    for (std::size_t c = toks[i].span.begin; c < toks[j].span.end; ++c) {
      if (out[c] != '\n') out[c] = ' ';
    }
    i = j + 1;
  }
  return out;
}

bool parses(std::string_view text) {
  try {
    Parser(text).compilation_unit();
    return true;
  } catch (const SyntaxError&) {
    return false;
  }
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::CompilationUnit: return "compilation-unit";
    case NodeKind::ClassDecl: return "class-decl";
    case NodeKind::MethodDecl: return "method-decl";
    case NodeKind::FieldDecl: return "field-decl";
    case NodeKind::Param: return "param";
    case NodeKind::LocalVarDecl: return "local-var-decl";
    case NodeKind::Declarator: return "declarator";
    case NodeKind::Block: return "block";
    case NodeKind::If: return "if";
    case NodeKind::While: return "while";
    case NodeKind::DoWhile: return "do-while";
    case NodeKind::For: return "for";
    case NodeKind::EnhancedFor: return "enhanced-for";
    case NodeKind::Try: return "try";
    case NodeKind::Resource: return "resource";
    case NodeKind::Catch: return "catch";
    case NodeKind::Finally: return "finally";
    case NodeKind::Switch: return "switch";
    case NodeKind::SwitchCase: return "switch-case";
    case NodeKind::Return: return "return";
    case NodeKind::Throw: return "throw";
    case NodeKind::Break: return "break";
    case NodeKind::Continue: return "continue";
    case NodeKind::Empty: return "empty";
    case NodeKind::ExpressionStmt: return "expression-stmt";
    case NodeKind::Labeled: return "labeled";
    case NodeKind::Synchronized: return "synchronized";
    case NodeKind::List: return "list";
    case NodeKind::MethodCall: return "method-call";
    case NodeKind::ObjectCreation: return "object-creation";
    case NodeKind::ArrayCreation: return "array-creation";
    case NodeKind::ArrayInit: return "array-init";
    case NodeKind::FieldAccess: return "field-access";
    case NodeKind::Assignment: return "assignment";
    case NodeKind::BinaryOp: return "binary-op";
    case NodeKind::UnaryOp: return "unary-op";
    case NodeKind::Conditional: return "conditional";
    case NodeKind::InstanceOf: return "instanceof";
    case NodeKind::Cast: return "cast";
    case NodeKind::Literal: return "literal";
    case NodeKind::Name: return "name";
    case NodeKind::This: return "this";
    case NodeKind::Super: return "super";
    case NodeKind::ClassLiteral: return "class-literal";
    case NodeKind::ArrayAccess: return "array-access";
    case NodeKind::Lambda: return "lambda-opaque";
    case NodeKind::MethodRef: return "method-ref";
  }
  return "?";
}

std::string_view to_string(SnippetKind kind) {
  switch (kind) {
    case SnippetKind::Expression: return "expression";
    case SnippetKind::StatementList: return "statement-list";
    case SnippetKind::Method: return "method";
    case SnippetKind::CompilationUnit: return "compilation-unit";
  }
  return "?";
}

SourceSnippet::SourceSnippet(std::string t, std::optional<std::string> origin)
    : text(std::move(t)), origin_id(std::move(origin)) {
  if (is_blank(text)) throw EmptyInput();
}

SnippetKind classify_snippet(std::string_view text) {
  if (is_blank(text)) throw EmptyInput();
  try {
    Parser probe(text);
    if (probe.starts_with_type_declaration()) return SnippetKind::CompilationUnit;
    if (probe.starts_with_member_declaration()) return SnippetKind::Method;
  } catch (const LexError&) {
    return SnippetKind::StatementList;
  } catch (const ParseError&) {
    // fall through to the trial parses
  }
  if (parses(harness_snippet(text, SnippetKind::StatementList).text)) {
    return SnippetKind::StatementList;
  }
  if (parses(harness_snippet(text, SnippetKind::Expression).text)) return SnippetKind::Expression;
  // Neither parses: report errors in statement context.
  return SnippetKind::StatementList;
}

Harnessed harness_snippet(std::string_view text, SnippetKind kind) {
  auto wrap = [&](std::string_view prefix, std::string_view suffix) {
    Harnessed h;
    h.offset = prefix.size();
    h.text.reserve(prefix.size() + text.size() + suffix.size());
    h.text.append(prefix);
    h.text.append(blank_imports(text));
    h.text.append(suffix);
    return h;
  };
  switch (kind) {
    case SnippetKind::CompilationUnit: return {std::string(text), 0};
    case SnippetKind::Method: return wrap(kMethodPrefix, kMethodSuffix);
    case SnippetKind::StatementList: return wrap(kStatementPrefix, kStatementSuffix);
    case SnippetKind::Expression: return wrap(kExpressionPrefix, kExpressionSuffix);
  }
  return {std::string(text), 0};
}

AstNode parse(std::string_view text) { return Parser(text).compilation_unit(); }

ParsedSnippet parse_snippet(std::string_view text) {
  ParsedSnippet out;
  out.kind = classify_snippet(text);
  Harnessed h = harness_snippet(text, out.kind);
  out.harness_offset = h.offset;
  out.harnessed_text = std::move(h.text);
  try {
    out.root = parse(out.harnessed_text);
  } catch (SyntaxError& e) {
    e.rebase(out.harness_offset, text.size());
    throw;
  }
  return out;
}

}  // namespace robustapi::java
