#include "robustapi/sequence.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace robustapi {

using java::AstNode;
using java::LiteralKind;
using java::NodeKind;
using java::Span;

constexpr std::string_view kHarnessClass = "__Harness";

// ---------------------------------------------------------------------------
// Guard predicates

Operand Operand::call_on(const Operand& on, std::string method) {
  if (on.kind != Kind::Receiver && on.kind != Kind::Argument) {
    throw std::invalid_argument("call operand must be based on rcv or an argument");
  }
  Operand o;
  o.kind = Kind::CallOn;
  o.base = on.kind;
  o.value = on.kind == Kind::Argument ? on.value : 0;
  o.method = std::move(method);
  return o;
}

std::string_view to_string(GuardOp op) {
  switch (op) {
    case GuardOp::Eq: return "==";
    case GuardOp::Ne: return "!=";
    case GuardOp::Lt: return "<";
    case GuardOp::Le: return "<=";
    case GuardOp::Gt: return ">";
    case GuardOp::Ge: return ">=";
    case GuardOp::Truthy: return "TRUTHY";
  }
  return "?";
}

namespace {

GuardOp mirror(GuardOp op) {
  switch (op) {
    case GuardOp::Lt: return GuardOp::Gt;
    case GuardOp::Le: return GuardOp::Ge;
    case GuardOp::Gt: return GuardOp::Lt;
    case GuardOp::Ge: return GuardOp::Le;
    default: return op;
  }
}

GuardOp negate(GuardOp op) {
  switch (op) {
    case GuardOp::Eq: return GuardOp::Ne;
    case GuardOp::Ne: return GuardOp::Eq;
    case GuardOp::Lt: return GuardOp::Ge;
    case GuardOp::Le: return GuardOp::Gt;
    case GuardOp::Gt: return GuardOp::Le;
    case GuardOp::Ge: return GuardOp::Lt;
    case GuardOp::Truthy: return GuardOp::Truthy;
  }
  return op;
}

}  // namespace

GuardPredicate GuardPredicate::truthy(Operand subject) {
  GuardPredicate g;
  g.lhs_ = std::move(subject);
  g.op_ = GuardOp::Truthy;
  return g;
}

GuardPredicate GuardPredicate::compare(Operand lhs, GuardOp op, Operand rhs) {
  if (op == GuardOp::Truthy) return truthy(std::move(lhs));
  GuardPredicate g;
  g.lhs_ = std::move(lhs);
  g.op_ = op;
  g.rhs_ = std::move(rhs);
  g.normalize();
  return g;
}

void GuardPredicate::normalize() {
  if (!rhs_) return;
  bool swap = false;
  if (lhs_.is_constant() && !rhs_->is_constant()) {
    swap = true;
  } else if (!lhs_.is_constant() && !rhs_->is_constant() && *rhs_ < lhs_) {
    swap = true;
  }
  if (swap) {
    std::swap(lhs_, *rhs_);
    op_ = mirror(op_);
  }
  using K = Operand::Kind;
  if (lhs_.is_constant()) return;
  bool is_true = rhs_->kind == K::True;
  bool is_false = rhs_->kind == K::False;
  if ((op_ == GuardOp::Eq && is_true) || (op_ == GuardOp::Ne && is_false)) {
    op_ = GuardOp::Truthy;
    rhs_.reset();
  } else if (op_ == GuardOp::Ne && is_true) {
    op_ = GuardOp::Eq;
    rhs_ = Operand::boolean(false);
  }
}

GuardPredicate GuardPredicate::negated() const {
  if (op_ == GuardOp::Truthy) return compare(lhs_, GuardOp::Eq, Operand::boolean(false));
  return compare(lhs_, negate(op_), *rhs_);
}

std::string to_string(const Operand& operand) {
  using K = Operand::Kind;
  switch (operand.kind) {
    case K::Receiver: return "rcv";
    case K::Argument: return "arg" + std::to_string(operand.value);
    case K::Null: return "null";
    case K::True: return "true";
    case K::False: return "false";
    case K::Integer: return std::to_string(operand.value);
    case K::CallOn: {
      std::string base = operand.base == K::Argument ? "arg" + std::to_string(operand.value) : "rcv";
      return base + "." + operand.method + "()";
    }
  }
  return "?";
}

std::string to_string(const GuardPredicate& guard) {
  if (guard.op() == GuardOp::Truthy) return to_string(guard.lhs());
  const Operand& rhs = *guard.rhs();
  if (guard.op() == GuardOp::Eq && rhs.kind == Operand::Kind::False &&
      guard.lhs().kind == Operand::Kind::CallOn) {
    return "!" + to_string(guard.lhs());
  }
  return to_string(guard.lhs()) + std::string(to_string(guard.op())) + to_string(rhs);
}

// ---------------------------------------------------------------------------
// Sequence tokens

std::string_view to_string(SeqKind kind) {
  switch (kind) {
    case SeqKind::Try: return "TRY";
    case SeqKind::Catch: return "CATCH";
    case SeqKind::Finally: return "FINALLY";
    case SeqKind::Loop: return "LOOP";
    case SeqKind::If: return "IF";
    case SeqKind::Else: return "ELSE";
    case SeqKind::End: return "END";
    case SeqKind::Call: return "CALL";
  }
  return "?";
}

SeqToken SeqToken::marker(SeqKind kind, Span span, std::string name) {
  SeqToken t;
  t.kind = kind;
  t.span = span;
  t.name = std::move(name);
  return t;
}

SeqToken SeqToken::call(std::string method, std::string receiver_type, std::string receiver_expr,
                        std::size_t arg_count) {
  SeqToken t;
  t.kind = SeqKind::Call;
  t.name = std::move(method);
  t.receiver_type = std::move(receiver_type);
  t.receiver_expr = std::move(receiver_expr);
  t.arg_count = arg_count;
  return t;
}

std::string to_string(const SeqToken& token) {
  if (token.kind == SeqKind::Catch) return "CATCH(" + token.name + ")";
  if (token.kind != SeqKind::Call) return std::string(to_string(token.kind));
  std::string out = "CALL " + token.name;
  if (!token.name.starts_with("new ")) {
    out += " rcv:" + (token.receiver_type.empty() ? std::string("UNKNOWN") : token.receiver_type);
  }
  if (!token.guards.empty()) {
    out += " [";
    for (std::size_t i = 0; i < token.guards.size(); ++i) {
      if (i > 0) out += ", ";
      out += to_string(token.guards[i]);
    }
    out += "]";
  }
  return out;
}

bool CallSequence::balanced() const {
  long depth = 0;
  for (const auto& t : tokens) {
    if (t.kind == SeqKind::End) {
      if (--depth < 0) return false;
    } else if (is_opener(t.kind)) {
      ++depth;
    }
  }
  return depth == 0;
}

// ---------------------------------------------------------------------------
// Canonical expression text

namespace {

std::string join_children(const AstNode& node, std::size_t first, std::size_t count) {
  std::string out;
  for (std::size_t i = first; i < first + count && i < node.children.size(); ++i) {
    if (i > first) out += ",";
    out += canonical_text(node.children[i]);
  }
  return out;
}

}  // namespace

std::string canonical_text(const AstNode& e) {
  switch (e.kind) {
    case NodeKind::Name: return e.name;
    case NodeKind::Literal:
      if (e.literal == LiteralKind::String) return "\"" + e.name + "\"";
      if (e.literal == LiteralKind::Char) return "'" + e.name + "'";
      return e.name;
    case NodeKind::This: return e.name.empty() ? "this" : e.name + ".this";
    case NodeKind::Super: return e.name.empty() ? "super" : e.name + ".super";
    case NodeKind::FieldAccess: return canonical_text(e.children.at(0)) + "." + e.name;
    case NodeKind::MethodCall: {
      std::string out;
      if (const AstNode* r = e.receiver()) out = canonical_text(*r) + ".";
      return out + e.name + "(" + join_children(e, e.has_receiver ? 1 : 0, e.arg_count) + ")";
    }
    case NodeKind::ObjectCreation: {
      std::string out = "new " + e.type_name + "(" + join_children(e, 0, e.arg_count) + ")";
      if (e.children.size() > e.arg_count) out += "{}";
      return out;
    }
    case NodeKind::ArrayCreation:
      return "new " + e.type_name + "[" + join_children(e, 0, e.children.size()) + "]";
    case NodeKind::ArrayInit: return "{" + join_children(e, 0, e.children.size()) + "}";
    case NodeKind::ArrayAccess:
      return canonical_text(e.children.at(0)) + "[" + canonical_text(e.children.at(1)) + "]";
    case NodeKind::BinaryOp:
    case NodeKind::Assignment:
      return "(" + canonical_text(e.children.at(0)) + e.name + canonical_text(e.children.at(1)) + ")";
    case NodeKind::UnaryOp:
      if (e.name.size() == 3 && e.name[0] == 'x') {
        return canonical_text(e.children.at(0)) + e.name.substr(1);
      }
      return e.name + canonical_text(e.children.at(0));
    case NodeKind::Cast: return "((" + e.type_name + ")" + canonical_text(e.children.at(0)) + ")";
    case NodeKind::InstanceOf:
      return "(" + canonical_text(e.children.at(0)) + " instanceof " + e.type_name + ")";
    case NodeKind::Conditional:
      return "(" + canonical_text(e.children.at(0)) + "?" + canonical_text(e.children.at(1)) + ":" +
             canonical_text(e.children.at(2)) + ")";
    case NodeKind::ClassLiteral: return e.type_name + ".class";
    case NodeKind::MethodRef:
      return (e.children.empty() ? e.type_name : canonical_text(e.children[0])) + "::" + e.name;
    default: return "<" + std::string(java::to_string(e.kind)) + ">";
  }
}

// ---------------------------------------------------------------------------
// Type environment

TypeEnv::TypeEnv(const ReturnTypeTable& returns) : returns_(&returns) {
  Scope root;
  root.span = {0, std::numeric_limits<std::size_t>::max()};
  scopes_.push_back(std::move(root));
}

std::size_t TypeEnv::open_scope(Span span, std::size_t parent, std::string class_name) {
  Scope s;
  s.span = span;
  s.parent = parent;
  s.depth = scopes_[parent].depth + 1;
  s.class_name = class_name.empty() ? scopes_[parent].class_name : std::move(class_name);
  scopes_.push_back(std::move(s));
  return scopes_.size() - 1;
}

void TypeEnv::bind(std::size_t scope, std::string name, std::string type) {
  bindings_.emplace_back(name, type);
  scopes_.at(scope).vars[std::move(name)] = std::move(type);
}

void TypeEnv::declare_class(std::string name, std::string super_name) {
  classes_.emplace(std::move(name), std::move(super_name));
}

std::size_t TypeEnv::innermost(std::size_t at) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scopes_.size(); ++i) {
    const Span& s = scopes_[i].span;
    if (s.begin <= at && at < s.end && scopes_[i].depth > scopes_[best].depth) best = i;
  }
  return best;
}

std::string TypeEnv::lookup(std::string_view name, std::size_t at) const {
  std::size_t s = innermost(at);
  while (true) {
    const auto& vars = scopes_[s].vars;
    if (auto it = vars.find(name); it != vars.end()) return it->second;
    if (s == 0) return {};
    s = scopes_[s].parent;
  }
}

std::string TypeEnv::lookup(std::string_view name) const {
  for (const auto& [n, t] : bindings_) {
    if (n == name) return t;
  }
  return {};
}

std::string TypeEnv::super_type(std::size_t at) const {
  const std::string& cls = scopes_[innermost(at)].class_name;
  auto it = classes_.find(cls);
  return it == classes_.end() ? std::string{} : it->second;
}

std::string TypeEnv::this_type(std::size_t at) const {
  const std::string& cls = scopes_[innermost(at)].class_name;
  if (cls.empty() || cls == kHarnessClass) return {};
  std::string sup = super_type(at);
  return sup.empty() ? cls : sup;
}

namespace {

bool looks_like_class_name(std::string_view name) {
  if (name.empty() || !(name[0] >= 'A' && name[0] <= 'Z')) return false;
  return std::any_of(name.begin(), name.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

std::string strip_array(std::string type) {
  if (type.ends_with("[]")) type.resize(type.size() - 2);
  return type;
}

}  // namespace

std::string TypeEnv::type_of(const AstNode& e) const {
  std::size_t at = e.span.begin;
  switch (e.kind) {
    case NodeKind::Name: {
      std::string t = lookup(e.name, at);
      if (t.empty() && looks_like_class_name(e.name)) return e.name;
      return t;
    }
    case NodeKind::FieldAccess:
      if (e.children.at(0).kind == NodeKind::This) return lookup(e.name, at);
      return {};
    case NodeKind::Literal:
      switch (e.literal) {
        case LiteralKind::String: return "String";
        case LiteralKind::Integer: return "int";
        case LiteralKind::Floating: return "double";
        case LiteralKind::Char: return "char";
        case LiteralKind::Boolean: return "boolean";
        default: return {};
      }
    case NodeKind::ObjectCreation:
    case NodeKind::ArrayCreation:
    case NodeKind::Cast:
      return e.type_name;
    case NodeKind::ArrayAccess: {
      std::string t = type_of(e.children.at(0));
      return t.ends_with("[]") ? strip_array(t) : std::string{};
    }
    case NodeKind::MethodCall: {
      std::string rt;
      if (const AstNode* r = e.receiver()) {
        rt = type_of(*r);
      } else {
        rt = this_type(at);
      }
      return returns_->lookup(rt, e.name);
    }
    case NodeKind::BinaryOp:
      if (e.name == "+" &&
          (type_of(e.children.at(0)) == "String" || type_of(e.children.at(1)) == "String")) {
        return "String";
      }
      return {};
    case NodeKind::This: return this_type(at);
    case NodeKind::Super: return super_type(at);
    case NodeKind::Conditional: {
      std::string t = type_of(e.children.at(1));
      return t.empty() ? type_of(e.children.at(2)) : t;
    }
    case NodeKind::Assignment: return type_of(e.children.at(0));
    default: return {};
  }
}

namespace {

class TypeBuilder {
 public:
  explicit TypeBuilder(TypeEnv& env) : env_(env) {}

  void visit(const AstNode& n, std::size_t scope) {
    switch (n.kind) {
      case NodeKind::ClassDecl: {
        std::string name = n.name.empty() ? n.type_name : n.name;
        if (!n.name.empty()) env_.declare_class(n.name, n.type_name);
        std::size_t s = env_.open_scope(n.span, scope, name);
        for (const auto& m : n.children) {
          if (m.kind == NodeKind::FieldDecl) bind_declarators(m, s);
        }
        visit_children(n, s);
        return;
      }
      case NodeKind::FieldDecl:
        visit_children(n, scope);
        return;
      case NodeKind::MethodDecl:
      case NodeKind::Lambda:
      case NodeKind::Block:
      case NodeKind::For:
      case NodeKind::EnhancedFor:
      case NodeKind::Try:
      case NodeKind::Switch:
      case NodeKind::SwitchCase: {
        std::size_t s = env_.open_scope(n.span, scope, {});
        visit_children(n, s);
        if (n.kind == NodeKind::EnhancedFor) {
          // element variable: declared type, or the array element type for `var`
          const AstNode& var = n.children.at(0);
          std::string type = var.type_name;
          if (type == "var") {
            std::string it = env_.type_of(n.children.at(1));
            type = it.ends_with("[]") ? strip_array(it) : std::string{};
          }
          for (const auto& d : var.children) env_.bind(s, d.name, type);
        }
        return;
      }
      case NodeKind::Catch: {
        std::size_t s = env_.open_scope(n.span, scope, {});
        env_.bind(s, n.name, n.type_name.substr(0, n.type_name.find('|')));
        visit_children(n, s);
        return;
      }
      case NodeKind::Param:
        if (!n.type_name.empty()) env_.bind(scope, n.name, n.type_name);
        return;
      case NodeKind::LocalVarDecl:
        visit_children(n, scope);
        bind_declarators(n, scope);
        return;
      case NodeKind::Resource:
        visit_children(n, scope);
        if (!n.name.empty()) {
          std::string type = n.type_name;
          if (type == "var" && !n.children.empty()) type = env_.type_of(n.children[0]);
          env_.bind(scope, n.name, type);
        }
        return;
      case NodeKind::Assignment: {
        visit_children(n, scope);
        const AstNode& lhs = n.children.at(0);
        const AstNode& rhs = n.children.at(1);
        if (n.name == "=" && lhs.kind == NodeKind::Name &&
            env_.lookup(lhs.name, lhs.span.begin).empty() &&
            (rhs.kind == NodeKind::ObjectCreation || rhs.kind == NodeKind::Cast)) {
          env_.bind(scope, lhs.name, rhs.type_name);
        }
        return;
      }
      default:
        visit_children(n, scope);
    }
  }

 private:
  void visit_children(const AstNode& n, std::size_t scope) {
    for (const auto& c : n.children) visit(c, scope);
  }

  void bind_declarators(const AstNode& decl, std::size_t scope) {
    for (const auto& d : decl.children) {
      std::string type = decl.type_name;
      if (type == "var") type = d.children.empty() ? std::string{} : env_.type_of(d.children[0]);
      env_.bind(scope, d.name, type);
    }
  }

  TypeEnv& env_;
};

}  // namespace

TypeEnv infer_types(const AstNode& ast, const ReturnTypeTable& returns) {
  TypeEnv env(returns);
  TypeBuilder(env).visit(ast, 0);
  return env;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

struct GuardFrame {
  const AstNode* cond;
  bool positive;
};

// Splits a condition into atoms that hold on the guarded path.
void conjuncts(const AstNode& e, bool positive, std::vector<GuardFrame>& out) {
  if (e.kind == NodeKind::UnaryOp && e.name == "!") {
    conjuncts(e.children.at(0), !positive, out);
    return;
  }
  if (e.kind == NodeKind::BinaryOp) {
    if ((positive && e.name == "&&") || (!positive && e.name == "||")) {
      conjuncts(e.children.at(0), positive, out);
      conjuncts(e.children.at(1), positive, out);
      return;
    }
    if (e.name == "&&" || e.name == "||") return;  // a disjunction guarantees no single atom
  }
  out.push_back({&e, positive});
}

std::optional<GuardOp> comparison(std::string_view op) {
  if (op == "==") return GuardOp::Eq;
  if (op == "!=") return GuardOp::Ne;
  if (op == "<") return GuardOp::Lt;
  if (op == "<=") return GuardOp::Le;
  if (op == ">") return GuardOp::Gt;
  if (op == ">=") return GuardOp::Ge;
  return std::nullopt;
}

std::optional<std::int64_t> integer_value(const AstNode& lit) {
  std::string digits;
  for (char c : lit.name) {
    if (c != '_') digits += c;
  }
  while (!digits.empty() && (digits.back() == 'l' || digits.back() == 'L')) digits.pop_back();
  try {
    std::size_t used = 0;
    std::int64_t v = 0;
    if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'b' || digits[1] == 'B')) {
      v = std::stoll(digits.substr(2), &used, 2);
      used += 2;
    } else {
      v = std::stoll(digits, &used, 0);
    }
    if (used != digits.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// What the guard language can say about the call being annotated.
struct CallContext {
  std::string receiver;           // canonical text, "" when absent
  std::vector<std::string> args;  // canonical texts
};

std::optional<Operand> base_operand(const std::string& text, const CallContext& ctx) {
  if (!ctx.receiver.empty() && text == ctx.receiver) return Operand::receiver();
  for (std::size_t i = 0; i < ctx.args.size(); ++i) {
    if (text == ctx.args[i]) return Operand::argument(static_cast<std::int64_t>(i));
  }
  return std::nullopt;
}

std::optional<Operand> to_operand(const AstNode& e, const CallContext& ctx) {
  if (e.kind == NodeKind::Literal) {
    switch (e.literal) {
      case LiteralKind::Null: return Operand::null();
      case LiteralKind::Boolean: return Operand::boolean(e.name == "true");
      case LiteralKind::Integer:
        if (auto v = integer_value(e)) return Operand::integer(*v);
        return std::nullopt;
      default: break;
    }
  }
  if (e.kind == NodeKind::UnaryOp && e.name == "-" && e.children.at(0).kind == NodeKind::Literal &&
      e.children[0].literal == LiteralKind::Integer) {
    if (auto v = integer_value(e.children[0])) return Operand::integer(-*v);
    return std::nullopt;
  }
  if (auto op = base_operand(canonical_text(e), ctx)) return op;
  if (e.kind == NodeKind::MethodCall && e.arg_count == 0 && e.receiver()) {
    if (auto base = base_operand(canonical_text(*e.receiver()), ctx)) {
      return Operand::call_on(*base, e.name);
    }
  }
  return std::nullopt;
}

std::optional<GuardPredicate> to_guard(const GuardFrame& atom, const CallContext& ctx) {
  const AstNode& e = *atom.cond;
  std::optional<GuardPredicate> g;
  if (e.kind == NodeKind::BinaryOp) {
    auto op = comparison(e.name);
    if (!op) return std::nullopt;
    auto lhs = to_operand(e.children.at(0), ctx);
    auto rhs = to_operand(e.children.at(1), ctx);
    if (!lhs || !rhs) return std::nullopt;
    g = GuardPredicate::compare(*lhs, *op, *rhs);
  } else {
    auto subject = to_operand(e, ctx);
    if (!subject || subject->is_constant()) return std::nullopt;
    g = GuardPredicate::truthy(*subject);
  }
  if (!atom.positive) g = g->negated();
  return g;
}

class Extractor {
 public:
  explicit Extractor(const TypeEnv& env) : env_(env) {}

  CallSequence run(const AstNode& root, java::SnippetKind kind) {
    seq_.snippet_kind = kind;
    stmt(root);
    return std::move(seq_);
  }

 private:
  void emit(SeqKind kind, Span span, std::string name = {}) {
    seq_.tokens.push_back(SeqToken::marker(kind, span, std::move(name)));
  }

  void stmt(const AstNode& n) {
    switch (n.kind) {
      case NodeKind::If: {
        const AstNode& cond = n.children.at(0);
        expr(cond);
        emit(SeqKind::If, n.span);
        guarded(cond, true, [&] { stmt(n.children.at(1)); });
        emit(SeqKind::End, n.span);
        if (n.children.size() > 2) {
          emit(SeqKind::Else, n.children[2].span);
          guarded(cond, false, [&] { stmt(n.children[2]); });
          emit(SeqKind::End, n.children[2].span);
        }
        return;
      }
      case NodeKind::While: {
        const AstNode& cond = n.children.at(0);
        emit(SeqKind::Loop, n.span);
        expr(cond);
        guarded(cond, true, [&] { stmt(n.children.at(1)); });
        emit(SeqKind::End, n.span);
        return;
      }
      case NodeKind::DoWhile:
        emit(SeqKind::Loop, n.span);
        stmt(n.children.at(0));
        expr(n.children.at(1));
        emit(SeqKind::End, n.span);
        return;
      case NodeKind::For: {
        for (const auto& init : n.children.at(0).children) {
          if (init.kind == NodeKind::LocalVarDecl) {
            stmt(init);
          } else {
            expr(init);
          }
        }
        const AstNode& cond = n.children.at(1);
        emit(SeqKind::Loop, n.span);
        bool has_cond = cond.kind != NodeKind::Empty;
        if (has_cond) expr(cond);
        auto body = [&] {
          stmt(n.children.at(3));
          for (const auto& u : n.children.at(2).children) expr(u);
        };
        if (has_cond) {
          guarded(cond, true, body);
        } else {
          body();
        }
        emit(SeqKind::End, n.span);
        return;
      }
      case NodeKind::EnhancedFor:
        expr(n.children.at(1));
        emit(SeqKind::Loop, n.span);
        stmt(n.children.at(2));
        emit(SeqKind::End, n.span);
        return;
      case NodeKind::Try:
        try_stmt(n);
        return;
      case NodeKind::Switch: {
        expr(n.children.at(0));
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          const AstNode& c = n.children[i];
          for (std::size_t j = 1; j < c.children.size(); ++j) stmt(c.children[j]);
        }
        return;
      }
      case NodeKind::LocalVarDecl:
      case NodeKind::FieldDecl:
        for (const auto& d : n.children) {
          for (const auto& init : d.children) expr(init);
        }
        return;
      case NodeKind::ExpressionStmt:
      case NodeKind::Return:
      case NodeKind::Throw:
        for (const auto& c : n.children) expr(c);
        return;
      case NodeKind::Synchronized:
        expr(n.children.at(0));
        stmt(n.children.at(1));
        return;
      case NodeKind::MethodDecl:
        for (const auto& c : n.children) {
          if (c.kind == NodeKind::Block) stmt(c);
        }
        return;
      case NodeKind::Param:
      case NodeKind::Empty:
      case NodeKind::Break:
      case NodeKind::Continue:
        return;
      case NodeKind::CompilationUnit:
      case NodeKind::ClassDecl:
      case NodeKind::Block:
      case NodeKind::Labeled:
        for (const auto& c : n.children) stmt(c);
        return;
      default:
        expr(n);
    }
  }

  void try_stmt(const AstNode& n) {
    emit(SeqKind::Try, n.span);
    std::vector<const AstNode*> resources;
    const AstNode* body = nullptr;
    for (const auto& c : n.children) {
      if (c.kind == NodeKind::Resource) {
        for (const auto& init : c.children) expr(init);
        resources.push_back(&c);
      } else if (c.kind == NodeKind::Block && body == nullptr) {
        body = &c;
        stmt(c);
      }
    }
    Span at = body ? Span{body->span.end, body->span.end} : n.span;
    for (auto it = resources.rbegin(); it != resources.rend(); ++it) {
      const AstNode& r = **it;
      std::string type = r.type_name;
      std::string text = r.name;
      if (!r.children.empty()) {
        if (type.empty() || type == "var") type = env_.type_of(r.children[0]);
        if (text.empty()) text = canonical_text(r.children[0]);
      }
      SeqToken close = SeqToken::call("close", type, text, 0);
      close.span = at;
      close.guards = guards_for(CallContext{text, {}});
      seq_.tokens.push_back(std::move(close));
    }
    emit(SeqKind::End, n.span);
    for (const auto& c : n.children) {
      if (c.kind == NodeKind::Catch) {
        emit(SeqKind::Catch, c.span, c.type_name);
        stmt(c.children.at(0));
        emit(SeqKind::End, c.span);
      } else if (c.kind == NodeKind::Finally) {
        emit(SeqKind::Finally, c.span);
        stmt(c.children.at(0));
        emit(SeqKind::End, c.span);
      }
    }
  }

  void expr(const AstNode& n) {
    switch (n.kind) {
      case NodeKind::MethodCall: {
        const AstNode* rcv = n.receiver();
        if (rcv) expr(*rcv);
        for (const auto& a : n.arguments()) expr(a);
        std::string type;
        if (rcv) {
          type = env_.type_of(*rcv);
        } else if (n.name == "super") {
          type = env_.super_type(n.span.begin);
        } else {
          type = env_.this_type(n.span.begin);
        }
        CallContext ctx{rcv ? canonical_text(*rcv) : std::string{}, {}};
        for (const auto& a : n.arguments()) ctx.args.push_back(canonical_text(a));
        SeqToken t = SeqToken::call(n.name, std::move(type), ctx.receiver, n.arg_count);
        t.span = n.span;
        t.guards = guards_for(ctx);
        seq_.tokens.push_back(std::move(t));
        return;
      }
      case NodeKind::ObjectCreation: {
        for (const auto& a : n.arguments()) expr(a);
        CallContext ctx;
        for (const auto& a : n.arguments()) ctx.args.push_back(canonical_text(a));
        SeqToken t = SeqToken::call("new " + n.type_name, n.type_name, {}, n.arg_count);
        t.span = n.span;
        t.guards = guards_for(ctx);
        seq_.tokens.push_back(std::move(t));
        if (n.children.size() > n.arg_count) stmt(n.children.back());
        return;
      }
      case NodeKind::Lambda: {
        // The body runs later, outside the enclosing conditions.
        std::vector<GuardFrame> saved;
        std::swap(saved, frames_);
        const AstNode& body = n.children.back();
        if (body.kind == NodeKind::Block) {
          stmt(body);
        } else {
          expr(body);
        }
        std::swap(saved, frames_);
        return;
      }
      case NodeKind::BinaryOp:
        if (n.name == "&&" || n.name == "||") {
          const AstNode& lhs = n.children.at(0);
          expr(lhs);
          guarded(lhs, n.name == "&&", [&] { expr(n.children.at(1)); });
          return;
        }
        break;
      case NodeKind::Conditional: {
        const AstNode& cond = n.children.at(0);
        expr(cond);
        guarded(cond, true, [&] { expr(n.children.at(1)); });
        guarded(cond, false, [&] { expr(n.children.at(2)); });
        return;
      }
      case NodeKind::Switch:
        stmt(n);
        return;
      case NodeKind::ClassDecl:
      case NodeKind::Block:
        stmt(n);
        return;
      default:
        break;
    }
    for (const auto& c : n.children) expr(c);
  }

  template <typename Fn>
  void guarded(const AstNode& cond, bool positive, Fn&& body) {
    std::size_t mark = frames_.size();
    conjuncts(cond, positive, frames_);
    body();
    frames_.resize(mark);
  }

  std::vector<GuardPredicate> guards_for(const CallContext& ctx) const {
    std::vector<GuardPredicate> out;
    for (const auto& f : frames_) {
      if (auto g = to_guard(f, ctx)) out.push_back(std::move(*g));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  const TypeEnv& env_;
  CallSequence seq_;
  std::vector<GuardFrame> frames_;
};

}  // namespace

CallSequence extract_sequence(const AstNode& ast, const TypeEnv& env, java::SnippetKind kind) {
  return Extractor(env).run(ast, kind);
}

std::vector<GuardPredicate> dominating_guards(const AstNode& ast, Span call_site) {
  TypeEnv env = infer_types(ast);
  CallSequence seq = extract_sequence(ast, env);
  for (const auto& t : seq.tokens) {
    if (t.kind == SeqKind::Call && t.span == call_site) return t.guards;
  }
  return {};
}

}  // namespace robustapi
