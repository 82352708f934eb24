#include "affordsim/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace affordsim::pddl {

Formula Formula::make_literal(Literal l) {
  Formula f;
  f.kind = Kind::Literal;
  f.lit = std::move(l);
  return f;
}

Formula Formula::make_and(std::vector<Formula> parts) {
  Formula f;
  f.kind = Kind::And;
  f.children = std::move(parts);
  return f;
}

Formula Formula::make_not(Formula inner) {
  Formula f;
  f.kind = Kind::Not;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::make_exists(std::vector<TypedVar> vars, Formula inner) {
  Formula f;
  f.kind = Kind::Exists;
  f.vars = std::move(vars);
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::make_forall(std::vector<TypedVar> vars, Formula inner) {
  Formula f;
  f.kind = Kind::Forall;
  f.vars = std::move(vars);
  f.children.push_back(std::move(inner));
  return f;
}

bool Domain::has_type(const std::string& t) const {
  return std::any_of(types.begin(), types.end(),
                     [&](const TypeDecl& d) { return d.name == t; });
}

bool Domain::is_subtype(const std::string& t, const std::string& ancestor) const {
  std::string cur = t;
  // parent chains are short; the guard only protects against malformed cycles
  for (std::size_t hops = 0; hops <= types.size(); ++hops) {
    if (cur == ancestor) return true;
    const TypeDecl* decl = nullptr;
    for (const auto& d : types) {
      if (d.name == cur) decl = &d;
    }
    if (!decl || decl->parent.empty()) return false;
    cur = decl->parent;
  }
  return false;
}

const PredicateDecl* Domain::find_predicate(const std::string& n) const {
  for (const auto& p : predicates) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

const ActionSchema* Domain::find_action(const std::string& n) const {
  for (const auto& a : actions) {
    if (a.name == n) return &a;
  }
  return nullptr;
}

std::vector<std::string> Problem::objects_of_type(const Domain& d,
                                                  const std::string& type) const {
  std::vector<std::string> out;
  for (const auto& o : objects) {
    if (d.is_subtype(o.type, type)) out.push_back(o.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::string* Problem::type_of(const std::string& obj) const {
  for (const auto& o : objects) {
    if (o.name == obj) return &o.type;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// s-expression reader
// ---------------------------------------------------------------------------

namespace {

struct SExpr {
  bool is_list = false;
  std::string sym;
  std::vector<SExpr> items;
  int line = 1;
  int col = 1;
};

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  SExpr read_all_as_one() {
    skip_ws();
    SExpr e = read();
    skip_ws();
    if (pos_ != text_.size()) {
      throw ParseError("trailing content after top-level form", line_, col_);
    }
    return e;
  }

 private:
  SExpr read() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, col_);
    int l = line_, c = col_;
    if (text_[pos_] == '(') {
      advance();
      SExpr list;
      list.is_list = true;
      list.line = l;
      list.col = c;
      while (true) {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("missing ')'", l, c);
        if (text_[pos_] == ')') {
          advance();
          return list;
        }
        list.items.push_back(read());
      }
    }
    if (text_[pos_] == ')') throw ParseError("unexpected ')'", l, c);
    SExpr atom;
    atom.line = l;
    atom.col = c;
    while (pos_ < text_.size() && !is_delim(text_[pos_])) {
      atom.sym.push_back(text_[pos_]);
      advance();
    }
    return atom;
  }

  static bool is_delim(char ch) {
    return ch == '(' || ch == ')' || ch == ';' || std::isspace(static_cast<unsigned char>(ch));
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (ch == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

std::string lowered(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_keyword(const SExpr& e, const char* kw) {
  return !e.is_list && lowered(e.sym) == kw;
}

[[noreturn]] void fail(const SExpr& at, const std::string& msg) {
  throw ParseError(msg, at.line, at.col);
}

// Reads `a b - t c # u`-style typed lists. '-' and '#' are interchangeable.
std::vector<TypedVar> parse_typed_list(const SExpr& list, bool want_vars) {
  std::vector<TypedVar> out;
  std::vector<std::string> pending;
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    const SExpr& it = list.items[i];
    if (it.is_list) fail(it, "expected a name in typed list");
    if (it.sym == "-" || it.sym == "#") {
      if (pending.empty()) fail(it, "type marker with no preceding names");
      if (i + 1 >= list.items.size() || list.items[i + 1].is_list) {
        fail(it, "type marker not followed by a type name");
      }
      const std::string& type = list.items[i + 1].sym;
      for (auto& name : pending) out.push_back({std::move(name), type});
      pending.clear();
      ++i;
      continue;
    }
    bool is_var = it.sym.size() > 1 && it.sym[0] == '?';
    if (want_vars != is_var) {
      fail(it, want_vars ? "expected a ?variable" : "expected a constant name");
    }
    pending.push_back(it.sym);
  }
  for (const auto& name : pending) {
    fail(list, "name '" + name + "' has no type annotation");
  }
  return out;
}

Atom parse_atom(const SExpr& e) {
  if (!e.is_list || e.items.empty() || e.items[0].is_list) {
    fail(e, "expected (predicate args...)");
  }
  Atom a;
  a.pred = e.items[0].sym;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    if (e.items[i].is_list) fail(e.items[i], "atom arguments must be names");
    a.args.push_back(e.items[i].sym);
  }
  return a;
}

Formula parse_formula(const SExpr& e) {
  if (!e.is_list || e.items.empty()) fail(e, "expected a formula");
  const SExpr& head = e.items[0];
  if (head.is_list) fail(head, "formula head must be a symbol");
  std::string op = lowered(head.sym);
  if (op == "and") {
    std::vector<Formula> parts;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      parts.push_back(parse_formula(e.items[i]));
    }
    return Formula::make_and(std::move(parts));
  }
  if (op == "not") {
    if (e.items.size() != 2) fail(e, "not takes exactly one argument");
    Formula inner = parse_formula(e.items[1]);
    if (inner.kind == Formula::Kind::Literal) {
      inner.lit.negated = !inner.lit.negated;
      return inner;
    }
    return Formula::make_not(std::move(inner));
  }
  if (op == "exists" || op == "forall") {
    if (e.items.size() != 3 || !e.items[1].is_list) {
      fail(e, op + " needs (vars) and a body");
    }
    auto vars = parse_typed_list(e.items[1], /*want_vars=*/true);
    if (vars.empty()) fail(e.items[1], op + " with no variables");
    Formula body = parse_formula(e.items[2]);
    return op == "exists" ? Formula::make_exists(std::move(vars), std::move(body))
                          : Formula::make_forall(std::move(vars), std::move(body));
  }
  return Formula::make_literal({parse_atom(e), false});
}

// Preconditions are restricted to conjunctions of (possibly negated) literals.
std::vector<Literal> flatten_precondition(const Formula& f, const SExpr& at) {
  std::vector<Literal> out;
  if (f.kind == Formula::Kind::Literal) {
    out.push_back(f.lit);
    return out;
  }
  if (f.kind != Formula::Kind::And) {
    fail(at, "preconditions must be a conjunction of literals");
  }
  for (const auto& child : f.children) {
    if (child.kind != Formula::Kind::Literal) {
      fail(at, "preconditions must be a conjunction of literals");
    }
    out.push_back(child.lit);
  }
  return out;
}

struct Scope {
  const Domain* domain = nullptr;
  std::map<std::string, std::string> var_types;
};

void check_atom(const Atom& a, const Scope& scope, const SExpr& at,
                const Problem* problem) {
  const PredicateDecl* decl = scope.domain->find_predicate(a.pred);
  if (!decl) fail(at, "undeclared predicate '" + a.pred + "'");
  if (decl->params.size() != a.args.size()) {
    throw ArityError("predicate '" + a.pred + "' expects " +
                     std::to_string(decl->params.size()) + " arguments, got " +
                     std::to_string(a.args.size()));
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    const std::string& arg = a.args[i];
    if (!arg.empty() && arg[0] == '?') {
      auto it = scope.var_types.find(arg);
      if (it == scope.var_types.end()) fail(at, "unbound variable " + arg);
      if (!scope.domain->is_subtype(it->second, decl->params[i].type)) {
        throw TypeCheckError("argument " + arg + " of '" + a.pred +
                             "' has type " + it->second + ", expected " +
                             decl->params[i].type);
      }
    } else if (problem) {
      const std::string* t = problem->type_of(arg);
      if (!t) fail(at, "unknown object '" + arg + "'");
      if (!scope.domain->is_subtype(*t, decl->params[i].type)) {
        throw TypeCheckError("object " + arg + " of type " + *t +
                             " cannot fill '" + a.pred + "' slot of type " +
                             decl->params[i].type);
      }
    }
  }
}

void check_formula(const Formula& f, Scope scope, const SExpr& at,
                   const Problem* problem) {
  switch (f.kind) {
    case Formula::Kind::Literal:
      check_atom(f.lit.atom, scope, at, problem);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Not:
      for (const auto& c : f.children) check_formula(c, scope, at, problem);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      for (const auto& v : f.vars) {
        if (!scope.domain->has_type(v.type)) {
          throw TypeCheckError("undeclared type '" + v.type + "' in quantifier");
        }
        scope.var_types[v.name] = v.type;
      }
      check_formula(f.children[0], scope, at, problem);
      return;
  }
}

}  // namespace

Domain parse_domain(const std::string& text) {
  SExpr root = Reader(text).read_all_as_one();
  if (!root.is_list || root.items.size() < 2 || !is_keyword(root.items[0], "define")) {
    fail(root, "expected (define (domain ...) ...)");
  }
  const SExpr& head = root.items[1];
  if (!head.is_list || head.items.size() != 2 || !is_keyword(head.items[0], "domain")) {
    fail(head, "expected (domain name)");
  }

  Domain d;
  d.name = head.items[1].sym;

  for (std::size_t s = 2; s < root.items.size(); ++s) {
    const SExpr& sec = root.items[s];
    if (!sec.is_list || sec.items.empty() || sec.items[0].is_list) {
      fail(sec, "expected a (:section ...)");
    }
    std::string kw = lowered(sec.items[0].sym);
    if (kw == ":requirements") {
      continue;  // accepted and ignored; the subset is fixed
    }
    if (kw == ":types") {
      // same typed-list shape, but names are types and the marker gives parents
      std::vector<std::string> pending;
      for (std::size_t i = 1; i < sec.items.size(); ++i) {
        const SExpr& it = sec.items[i];
        if (it.is_list) fail(it, "type names must be symbols");
        if (it.sym == "-" || it.sym == "#") {
          if (pending.empty() || i + 1 >= sec.items.size()) {
            fail(it, "malformed :types clause");
          }
          const std::string& parent = sec.items[i + 1].sym;
          for (auto& n : pending) d.types.push_back({std::move(n), parent});
          pending.clear();
          ++i;
          continue;
        }
        pending.push_back(it.sym);
      }
      for (auto& n : pending) d.types.push_back({std::move(n), ""});
      // parents that are not declared elsewhere become roots
      std::vector<std::string> missing;
      for (const auto& t : d.types) {
        if (!t.parent.empty() && !d.has_type(t.parent)) {
          missing.push_back(t.parent);
        }
      }
      for (auto& n : missing) {
        if (!d.has_type(n)) d.types.push_back({std::move(n), ""});
      }
      continue;
    }
    if (kw == ":predicates") {
      for (std::size_t i = 1; i < sec.items.size(); ++i) {
        const SExpr& pe = sec.items[i];
        if (!pe.is_list || pe.items.empty() || pe.items[0].is_list) {
          fail(pe, "expected (predicate ?args...)");
        }
        PredicateDecl pd;
        pd.name = pe.items[0].sym;
        SExpr rest = pe;
        rest.items.erase(rest.items.begin());
        pd.params = parse_typed_list(rest, /*want_vars=*/true);
        for (const auto& v : pd.params) {
          if (!d.has_type(v.type)) {
            throw TypeCheckError("predicate '" + pd.name +
                                 "' uses undeclared type '" + v.type + "'");
          }
        }
        if (d.find_predicate(pd.name)) {
          fail(pe, "duplicate predicate '" + pd.name + "'");
        }
        d.predicates.push_back(std::move(pd));
      }
      continue;
    }
    if (kw == ":action") {
      if (sec.items.size() < 2 || sec.items[1].is_list) {
        fail(sec, "expected (:action name ...)");
      }
      ActionSchema a;
      a.name = sec.items[1].sym;
      if (d.find_action(a.name)) fail(sec, "duplicate action '" + a.name + "'");
      Formula pre = Formula::make_and({});
      Formula eff = Formula::make_and({});
      const SExpr* pre_at = &sec;
      const SExpr* eff_at = &sec;
      for (std::size_t i = 2; i < sec.items.size(); ++i) {
        const SExpr& key = sec.items[i];
        if (key.is_list) fail(key, "expected :keyword inside action");
        std::string k = lowered(key.sym);
        if (i + 1 >= sec.items.size()) fail(key, k + " missing its value");
        const SExpr& val = sec.items[++i];
        if (k == ":parameters") {
          if (!val.is_list) fail(val, ":parameters needs a list");
          a.params = parse_typed_list(val, /*want_vars=*/true);
        } else if (k == ":precondition") {
          pre = parse_formula(val);
          pre_at = &val;
        } else if (k == ":effect") {
          eff = parse_formula(val);
          eff_at = &val;
        } else if (k == ":cost") {
          if (val.is_list) fail(val, ":cost needs an integer");
          a.base_cost = std::stoi(val.sym);
          if (a.base_cost < 1) fail(val, "action cost must be >= 1");
        } else {
          fail(key, "unsupported action keyword " + k);
        }
      }

      Scope scope{&d, {}};
      for (const auto& v : a.params) {
        if (!d.has_type(v.type)) {
          throw TypeCheckError("action '" + a.name + "' uses undeclared type '" +
                               v.type + "'");
        }
        if (scope.var_types.count(v.name)) {
          fail(sec, "duplicate parameter " + v.name);
        }
        scope.var_types[v.name] = v.type;
      }
      a.precond = flatten_precondition(pre, *pre_at);
      for (const auto& l : a.precond) check_atom(l.atom, scope, *pre_at, nullptr);

      auto effect_parts = eff.kind == Formula::Kind::And
                              ? eff.children
                              : std::vector<Formula>{eff};
      for (const auto& part : effect_parts) {
        if (part.kind != Formula::Kind::Literal) {
          fail(*eff_at, "effects must be a conjunction of literals");
        }
        check_atom(part.lit.atom, scope, *eff_at, nullptr);
        if (part.lit.negated) {
          a.del.push_back(part.lit.atom);
        } else {
          a.add.push_back(part.lit.atom);
        }
      }
      d.actions.push_back(std::move(a));
      continue;
    }
    fail(sec, "unsupported domain section " + kw);
  }
  return d;
}

Problem parse_problem(const std::string& text, const Domain& domain) {
  SExpr root = Reader(text).read_all_as_one();
  if (!root.is_list || root.items.size() < 2 || !is_keyword(root.items[0], "define")) {
    fail(root, "expected (define (problem ...) ...)");
  }
  const SExpr& head = root.items[1];
  if (!head.is_list || head.items.size() != 2 || !is_keyword(head.items[0], "problem")) {
    fail(head, "expected (problem name)");
  }

  Problem p;
  p.name = head.items[1].sym;
  bool saw_goal = false;

  for (std::size_t s = 2; s < root.items.size(); ++s) {
    const SExpr& sec = root.items[s];
    if (!sec.is_list || sec.items.empty() || sec.items[0].is_list) {
      fail(sec, "expected a (:section ...)");
    }
    std::string kw = lowered(sec.items[0].sym);
    if (kw == ":domain") {
      if (sec.items.size() != 2) fail(sec, "expected (:domain name)");
      p.domain_name = sec.items[1].sym;
      if (p.domain_name != domain.name) {
        throw TypeCheckError("problem references domain '" + p.domain_name +
                             "' but was parsed against '" + domain.name + "'");
      }
      continue;
    }
    if (kw == ":objects") {
      SExpr rest = sec;
      rest.items.erase(rest.items.begin());
      p.objects = parse_typed_list(rest, /*want_vars=*/false);
      for (const auto& o : p.objects) {
        if (!domain.has_type(o.type)) {
          throw TypeCheckError("object '" + o.name + "' has undeclared type '" +
                               o.type + "'");
        }
      }
      continue;
    }
    if (kw == ":init") {
      Scope scope{&domain, {}};
      for (std::size_t i = 1; i < sec.items.size(); ++i) {
        Atom a = parse_atom(sec.items[i]);
        for (const auto& arg : a.args) {
          if (!arg.empty() && arg[0] == '?') {
            fail(sec.items[i], "init atoms must be ground");
          }
        }
        check_atom(a, scope, sec.items[i], &p);
        p.init.push_back(std::move(a));
      }
      continue;
    }
    if (kw == ":goal") {
      if (sec.items.size() != 2) fail(sec, "expected (:goal formula)");
      p.goal = parse_formula(sec.items[1]);
      check_formula(p.goal, Scope{&domain, {}}, sec.items[1], &p);
      saw_goal = true;
      continue;
    }
    fail(sec, "unsupported problem section " + kw);
  }
  if (!saw_goal) fail(root, "problem has no :goal");
  return p;
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

namespace {

void print_typed_vars(std::ostringstream& os, const std::vector<TypedVar>& vars) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) os << ' ';
    os << vars[i].name << " - " << vars[i].type;
  }
}

void print_atom(std::ostringstream& os, const Atom& a) {
  os << '(' << a.pred;
  for (const auto& arg : a.args) os << ' ' << arg;
  os << ')';
}

void print_formula_rec(std::ostringstream& os, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Literal:
      if (f.lit.negated) os << "(not ";
      print_atom(os, f.lit.atom);
      if (f.lit.negated) os << ')';
      return;
    case Formula::Kind::And:
      os << "(and";
      for (const auto& c : f.children) {
        os << ' ';
        print_formula_rec(os, c);
      }
      os << ')';
      return;
    case Formula::Kind::Not:
      os << "(not ";
      print_formula_rec(os, f.children[0]);
      os << ')';
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      os << (f.kind == Formula::Kind::Exists ? "(exists (" : "(forall (");
      print_typed_vars(os, f.vars);
      os << ") ";
      print_formula_rec(os, f.children[0]);
      os << ')';
      return;
  }
}

}  // namespace

std::string print_formula(const Formula& f) {
  std::ostringstream os;
  print_formula_rec(os, f);
  return os.str();
}

std::string print_domain(const Domain& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  os << "  (:requirements :strips :typing)\n";
  if (!d.types.empty()) {
    os << "  (:types";
    for (const auto& t : d.types) {
      os << ' ' << t.name;
      if (!t.parent.empty()) os << " - " << t.parent;
    }
    os << ")\n";
  }
  os << "  (:predicates\n";
  for (const auto& p : d.predicates) {
    os << "    (" << p.name;
    if (!p.params.empty()) {
      os << ' ';
      print_typed_vars(os, p.params);
    }
    os << ")\n";
  }
  os << "  )\n";
  for (const auto& a : d.actions) {
    os << "  (:action " << a.name << "\n"
       << "    :parameters (";
    print_typed_vars(os, a.params);
    os << ")\n    :precondition (and";
    for (const auto& l : a.precond) {
      os << ' ';
      if (l.negated) os << "(not ";
      print_atom(os, l.atom);
      if (l.negated) os << ')';
    }
    os << ")\n    :effect (and";
    for (const auto& atom : a.add) {
      os << ' ';
      print_atom(os, atom);
    }
    for (const auto& atom : a.del) {
      os << " (not ";
      print_atom(os, atom);
      os << ')';
    }
    os << ")";
    if (a.base_cost != 1) os << "\n    :cost " << a.base_cost;
    os << ")\n";
  }
  os << ")\n";
  return os.str();
}

std::string print_problem(const Problem& p, const Domain& d) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n";
  os << "  (:domain " << (p.domain_name.empty() ? d.name : p.domain_name) << ")\n";
  os << "  (:objects\n";
  for (const auto& o : p.objects) {
    os << "    " << o.name << " - " << o.type << "\n";
  }
  os << "  )\n  (:init\n";
  for (const auto& a : p.init) {
    os << "    ";
    print_atom(os, a);
    os << "\n";
  }
  os << "  )\n  (:goal " << print_formula(p.goal) << ")\n)\n";
  return os.str();
}

}  // namespace affordsim::pddl
