#pragma once

// Call-sequence extraction: a source-ordered walk of the syntax tree that
// records control-structure markers and method calls, each call annotated
// with its inferred receiver type and the guard conditions dominating it.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robustapi/java_ast.hpp"
#include "robustapi/types.hpp"

namespace robustapi {

// ---------------------------------------------------------------------------
// Guard predicates

/// An operand of the guard mini-language: the call's receiver, one of its
/// arguments, a constant, or a zero-argument call on receiver/argument.
struct Operand {
  enum class Kind { Receiver, Argument, Null, True, False, Integer, CallOn };

  Kind kind = Kind::Receiver;
  std::int64_t value = 0;        // argument index or integer literal
  Kind base = Kind::Receiver;    // CallOn: Receiver or Argument (index in `value`)
  std::string method;            // CallOn only

  static Operand receiver() { return {}; }
  static Operand argument(std::int64_t index) { return {Kind::Argument, index, Kind::Receiver, {}}; }
  static Operand null() { return {Kind::Null, 0, Kind::Receiver, {}}; }
  static Operand boolean(bool b) { return {b ? Kind::True : Kind::False, 0, Kind::Receiver, {}}; }
  static Operand integer(std::int64_t v) { return {Kind::Integer, v, Kind::Receiver, {}}; }
  /// `on` must be a receiver or argument operand.
  static Operand call_on(const Operand& on, std::string method);

  bool is_constant() const {
    return kind == Kind::Null || kind == Kind::True || kind == Kind::False ||
           kind == Kind::Integer;
  }

  friend bool operator==(const Operand&, const Operand&) = default;
  friend auto operator<=>(const Operand&, const Operand&) = default;
};

enum class GuardOp { Eq, Ne, Lt, Le, Gt, Ge, Truthy };

std::string_view to_string(GuardOp op);

/// A normalized comparison. Normal form: a constant operand is always on the
/// right; of two non-constant operands the lower-ranked one (receiver <
/// argument < call) is on the left; `x == true` / `x != false` become TRUTHY
/// and `x != true` becomes `x == false`.
class GuardPredicate {
 public:
  static GuardPredicate truthy(Operand subject);
  static GuardPredicate compare(Operand lhs, GuardOp op, Operand rhs);

  const Operand& lhs() const { return lhs_; }
  GuardOp op() const { return op_; }
  const std::optional<Operand>& rhs() const { return rhs_; }

  /// Logical negation, which always stays inside the language
  /// (TRUTHY x <-> x == false).
  GuardPredicate negated() const;

  friend bool operator==(const GuardPredicate&, const GuardPredicate&) = default;
  friend auto operator<=>(const GuardPredicate&, const GuardPredicate&) = default;

 private:
  GuardPredicate() = default;
  void normalize();

  Operand lhs_;
  GuardOp op_ = GuardOp::Truthy;
  std::optional<Operand> rhs_;
};

/// Rule-file spelling: `rcv!=null`, `arg0<rcv.size()`, `rcv.hasNext()`,
/// `!rcv.exists()`.
std::string to_string(const Operand& operand);
std::string to_string(const GuardPredicate& guard);

// ---------------------------------------------------------------------------
// Sequence tokens

enum class SeqKind { Try, Catch, Finally, Loop, If, Else, End, Call };

std::string_view to_string(SeqKind kind);

inline bool is_opener(SeqKind kind) {
  return kind != SeqKind::End && kind != SeqKind::Call;
}

struct SeqToken {
  SeqKind kind = SeqKind::Call;
  std::string name;           // CALL: method ("new T" for creations); CATCH: exception type(s) "A|B"
  std::string receiver_type;  // CALL: "" when unknown
  std::string receiver_expr;  // CALL: canonical receiver text, "" when absent
  std::size_t arg_count = 0;
  std::vector<GuardPredicate> guards;  // sorted, unique
  java::Span span;

  static SeqToken marker(SeqKind kind, java::Span span = {}, std::string name = {});
  static SeqToken call(std::string method, std::string receiver_type = {},
                       std::string receiver_expr = {}, std::size_t arg_count = 0);
};

/// `CALL write rcv:PrintWriter`, `CATCH(IOException)`, `TRY` ...
std::string to_string(const SeqToken& token);

struct CallSequence {
  std::vector<SeqToken> tokens;
  java::SnippetKind snippet_kind = java::SnippetKind::CompilationUnit;

  /// Running opener/END counter never negative and ends at zero.
  bool balanced() const;
};

// ---------------------------------------------------------------------------
// Type environment

class TypeEnv {
 public:
  struct Scope {
    java::Span span;
    std::size_t parent = 0;
    std::size_t depth = 0;
    std::map<std::string, std::string, std::less<>> vars;
    std::string class_name;  // enclosing class, for `this`
  };

  explicit TypeEnv(const ReturnTypeTable& returns = ReturnTypeTable::builtin());

  /// Type of `name` as seen from source offset `at`; "" if unbound.
  std::string lookup(std::string_view name, std::size_t at) const;
  /// First binding of `name` in source order, ignoring scoping; "" if none.
  std::string lookup(std::string_view name) const;

  /// Static type of an expression node, "" when it cannot be inferred.
  std::string type_of(const java::AstNode& expr) const;

  /// Type standing in for `this` at offset `at`: the enclosing class's
  /// superclass when it declares one (inherited framework calls such as
  /// setContentView), else the class name; "" inside the synthetic harness.
  std::string this_type(std::size_t at) const;
  /// Declared superclass of the class enclosing `at`, "" if none.
  std::string super_type(std::size_t at) const;

  const std::vector<Scope>& scopes() const { return scopes_; }
  const ReturnTypeTable& returns() const { return *returns_; }

  // builder interface used by infer_types
  std::size_t open_scope(java::Span span, std::size_t parent, std::string class_name);
  void bind(std::size_t scope, std::string name, std::string type);
  void declare_class(std::string name, std::string super_name);
  /// Innermost scope containing offset `at`.
  std::size_t innermost(std::size_t at) const;

 private:
  std::vector<Scope> scopes_;
  std::vector<std::pair<std::string, std::string>> bindings_;  // source order
  std::map<std::string, std::string, std::less<>> classes_;    // name -> superclass
  const ReturnTypeTable* returns_;
};

/// Binds variables from declarations, parameters, catch clauses, resources,
/// `new T(...)` / cast assignments to undeclared names, and `var` initializers.
TypeEnv infer_types(const java::AstNode& ast,
                    const ReturnTypeTable& returns = ReturnTypeTable::builtin());

CallSequence extract_sequence(const java::AstNode& ast, const TypeEnv& env,
                              java::SnippetKind kind = java::SnippetKind::CompilationUnit);

/// Guards dominating the method call or object creation whose span is
/// `call_site`; empty if there is no such call.
std::vector<GuardPredicate> dominating_guards(const java::AstNode& ast, java::Span call_site);

/// Compact, whitespace-free rendering of an expression used to identify
/// receivers and arguments (`map.get(k)`, `this.list`).
std::string canonical_text(const java::AstNode& expr);

}  // namespace robustapi
