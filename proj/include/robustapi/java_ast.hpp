#pragma once

// Tokenizer and recursive-descent parser for the subset of Java that shows up
// in forum answers and model-generated snippets.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace robustapi::java {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

// ---------------------------------------------------------------------------
// Errors

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, std::size_t offset)
      : std::runtime_error(message), offset_(offset) {}
  std::size_t offset() const { return offset_; }
  void rebase(std::size_t shift, std::size_t limit) {
    offset_ = offset_ < shift ? 0 : offset_ - shift;
    if (offset_ > limit) offset_ = limit;
  }

 private:
  std::size_t offset_;
};

/// Unterminated string, char literal, text block or block comment.
class LexError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

class ParseError : public SyntaxError {
 public:
  ParseError(const std::string& message, std::size_t offset,
             std::vector<std::string> expected = {})
      : SyntaxError(message, offset), expected_(std::move(expected)) {}
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::vector<std::string> expected_;
};

class EmptyInput : public std::invalid_argument {
 public:
  EmptyInput() : std::invalid_argument("empty snippet") {}
};

// ---------------------------------------------------------------------------
// Tokens

enum class TokenKind {
  Identifier,
  Keyword,
  IntLiteral,
  FloatLiteral,
  StringLiteral,
  CharLiteral,
  BoolLiteral,
  NullLiteral,
  Operator,
  Separator,
  Error,
};

struct Token {
  TokenKind kind = TokenKind::Error;
  std::string text;   // raw lexeme
  std::string value;  // decoded value for string/char literals, else == text
  Span span;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
};

/// Splits `text` into tokens, skipping whitespace and comments. Characters
/// that cannot start a token become Error tokens; unterminated literals and
/// comments throw LexError.
std::vector<Token> tokenize(std::string_view text);

bool is_keyword(std::string_view word);

// ---------------------------------------------------------------------------
// Syntax tree

enum class NodeKind {
  CompilationUnit,
  ClassDecl,
  MethodDecl,
  FieldDecl,
  Param,
  LocalVarDecl,
  Declarator,
  Block,
  If,
  While,
  DoWhile,
  For,
  EnhancedFor,
  Try,
  Resource,
  Catch,
  Finally,
  Switch,
  SwitchCase,
  Return,
  Throw,
  Break,
  Continue,
  Empty,
  ExpressionStmt,
  Labeled,
  Synchronized,
  List,
  MethodCall,
  ObjectCreation,
  ArrayCreation,
  ArrayInit,
  FieldAccess,
  Assignment,
  BinaryOp,
  UnaryOp,
  Conditional,
  InstanceOf,
  Cast,
  Literal,
  Name,
  This,
  Super,
  ClassLiteral,
  ArrayAccess,
  Lambda,
  MethodRef,
};

std::string_view to_string(NodeKind kind);

enum class LiteralKind { None, Integer, Floating, String, Char, Boolean, Null };

/// One syntax node. Child layout per kind:
///   CompilationUnit  type declarations
///   ClassDecl        members (ClassDecl, MethodDecl, FieldDecl, Block initializers)
///   MethodDecl       Param..., [Block body]             name, type_name = return type
///   FieldDecl/LocalVarDecl  Declarator...               type_name = declared type
///   Declarator       [initializer]                      name
///   If               cond, then, [else]
///   While            cond, body;  DoWhile  body, cond
///   For              List(init), cond|Empty, List(update), body
///   EnhancedFor      LocalVarDecl, iterable, body
///   Try              Resource..., Block, Catch..., [Finally]
///   Resource         [initializer/expression]           name, type_name (empty for expression resources)
///   Catch            Block                              name = variable, type_name = "A|B"
///   Finally          Block
///   Switch           selector, SwitchCase...;  SwitchCase  List(labels), statements...
///   MethodCall       [receiver], arguments...           name, has_receiver, arg_count
///   ObjectCreation   arguments..., [ClassDecl body]     type_name, arg_count
///   FieldAccess      target                             name
///   Assignment/BinaryOp  lhs, rhs                       name = operator
///   UnaryOp          operand                            name = operator ("x++" / "x--" for postfix)
///   Cast             operand                            type_name
///   Lambda           Param..., body (Block or expression)
struct AstNode {
  NodeKind kind = NodeKind::Empty;
  Span span;
  std::string name;
  std::string type_name;
  LiteralKind literal = LiteralKind::None;
  bool has_receiver = false;
  std::size_t arg_count = 0;
  std::vector<AstNode> children;

  const AstNode* receiver() const {
    return has_receiver && !children.empty() ? &children.front() : nullptr;
  }
  std::span<const AstNode> arguments() const {
    std::size_t first = has_receiver ? 1 : 0;
    return std::span<const AstNode>(children).subspan(first, arg_count);
  }

  friend bool operator==(const AstNode&, const AstNode&) = default;
};

// ---------------------------------------------------------------------------
// Snippets

enum class SnippetKind { Expression, StatementList, Method, CompilationUnit };

std::string_view to_string(SnippetKind kind);

struct SourceSnippet {
  std::string text;
  std::optional<std::string> origin_id;

  /// Throws EmptyInput when `text` is blank.
  explicit SourceSnippet(std::string text, std::optional<std::string> origin = std::nullopt);
};

struct Harnessed {
  std::string text;
  std::size_t offset = 0;  // position of the original text inside `text`
};

/// Decides how a bare snippet must be wrapped. Order of preference:
/// compilation-unit, method, statement-list, expression. Input that parses in
/// neither of the last two wrappers counts as a statement list.
SnippetKind classify_snippet(std::string_view text);

/// Wraps `text` in the fixed synthetic scaffolding for `kind`. Leading
/// package/import declarations of non-unit snippets are blanked in place so
/// the original text keeps a fixed offset.
Harnessed harness_snippet(std::string_view text, SnippetKind kind);

/// Parses a full compilation unit. Throws ParseError or LexError.
AstNode parse(std::string_view text);

struct ParsedSnippet {
  AstNode root;
  SnippetKind kind = SnippetKind::CompilationUnit;
  std::size_t harness_offset = 0;
  std::string harnessed_text;
};

/// classify -> harness -> parse. Error offsets are relative to `text`.
ParsedSnippet parse_snippet(std::string_view text);

/// Visits `node` and its descendants in pre-order.
template <typename Fn>
void walk(const AstNode& node, Fn&& fn) {
  fn(node);
  for (const auto& child : node.children) walk(child, fn);
}

}  // namespace robustapi::java
