#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "refine/ast.hpp"
#include "refine/diag.hpp"

namespace refine {

// Name-resolution context for sort checking: program variables and constants
// come from a declaration, logical variables from the enclosing binders.
struct SortCtx {
  const ProgramDecl* decl = nullptr;
  std::vector<std::pair<std::string, Sort>> logicals;

  const Sort* lookupLogical(const std::string& n) const {
    for (auto it = logicals.rbegin(); it != logicals.rend(); ++it)
      if (it->first == n) return &it->second;
    return nullptr;
  }
};

namespace detail {

inline long long satAdd(long long a, long long b) {
  __int128 r = static_cast<__int128>(a) + b;
  const long long cap = (1LL << 62);
  if (r > cap) return cap;
  if (r < -cap) return -cap;
  return static_cast<long long>(r);
}
inline long long satMul(long long a, long long b) {
  __int128 r = static_cast<__int128>(a) * b;
  const long long cap = (1LL << 62);
  if (r > cap) return cap;
  if (r < -cap) return -cap;
  return static_cast<long long>(r);
}

inline IntRange joinRange(IntRange a, IntRange b) {
  return IntRange{std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

}  // namespace detail

// Computes the static sort of an expression, rejecting ill-kinded trees.
// Integer ranges are conservative interval bounds; set universes are
// conservative supersets of the possible elements.
inline Sort sortOfExpr(const ExprRef& e, const SortCtx& ctx) {
  using detail::satAdd;
  using detail::satMul;
  if (!e) throw LoadError("null expression");
  auto intOf = [&](const ExprRef& x) {
    Sort s = sortOfExpr(x, ctx);
    if (s.kind() != Sort::Kind::Int)
      throw LoadError("expected an integer expression");
    return s.intRange();
  };
  switch (e->kind) {
    case ExprKind::IntLit:
      return Sort(IntRange{e->intVal, e->intVal});
    case ExprKind::SetLit:
      return Sort(SetOver{e->setVal.elems});
    case ExprKind::Var: {
      if (const Sort* s = ctx.lookupLogical(e->name)) return *s;
      if (ctx.decl) {
        if (const Sort* s = ctx.decl->sortOf(e->name)) return *s;
        auto it = ctx.decl->constants.find(e->name);
        if (it != ctx.decl->constants.end()) {
          const Value& v = it->second;
          if (v.isInt()) return Sort(IntRange{v.asInt(), v.asInt()});
          if (v.isSet()) return Sort(SetOver{v.asSet().elems});
          const auto& a = v.asArray();
          long long lo = a.elems.empty() ? 0 : a.elems[0], hi = lo;
          for (long long x : a.elems) { lo = std::min(lo, x); hi = std::max(hi, x); }
          return Sort(ArrayOf{a.elems.size(), IntRange{lo, hi}});
        }
      }
      throw LoadError("undeclared identifier '" + e->name + "'");
    }
    case ExprKind::Add: {
      auto r1 = intOf(e->a), r2 = intOf(e->b);
      return Sort(IntRange{satAdd(r1.lo, r2.lo), satAdd(r1.hi, r2.hi)});
    }
    case ExprKind::Sub: {
      auto r1 = intOf(e->a), r2 = intOf(e->b);
      return Sort(IntRange{satAdd(r1.lo, -r2.hi), satAdd(r1.hi, -r2.lo)});
    }
    case ExprKind::Mul: {
      auto r1 = intOf(e->a), r2 = intOf(e->b);
      long long c[4] = {satMul(r1.lo, r2.lo), satMul(r1.lo, r2.hi),
                        satMul(r1.hi, r2.lo), satMul(r1.hi, r2.hi)};
      return Sort(IntRange{*std::min_element(c, c + 4), *std::max_element(c, c + 4)});
    }
    case ExprKind::BitOr: {
      auto r1 = intOf(e->a), r2 = intOf(e->b);
      if (r1.lo >= 0 && r2.lo >= 0) {
        long long m = std::max(r1.hi, r2.hi);
        long long bound = 1;
        while (bound <= m && bound < (1LL << 62)) bound <<= 1;
        return Sort(IntRange{0, bound - 1});
      }
      return Sort(IntRange{-(1LL << 62), (1LL << 62)});
    }
    case ExprKind::Shl: {
      auto r1 = intOf(e->a), r2 = intOf(e->b);
      if (r1.lo >= 0) {
        long long sh = std::min<long long>(std::max<long long>(r2.hi, 0), 62);
        return Sort(IntRange{0, satMul(r1.hi, 1LL << sh)});
      }
      return Sort(IntRange{-(1LL << 62), (1LL << 62)});
    }
    case ExprKind::SetUnion: {
      Sort s1 = sortOfExpr(e->a, ctx), s2 = sortOfExpr(e->b, ctx);
      if (s1.kind() != Sort::Kind::Set || s2.kind() != Sort::Kind::Set)
        throw LoadError("set union needs set operands");
      std::vector<long long> u = s1.setOver().universe;
      for (long long x : s2.setOver().universe) u.push_back(x);
      return Sort(SetOver{std::move(u)});
    }
    case ExprKind::SetSingleton: {
      auto r = intOf(e->a);
      if (r.hi - r.lo > 4096)
        throw LoadError("singleton element range too wide for a finite universe");
      std::vector<long long> u;
      for (long long v = r.lo; v <= r.hi; ++v) u.push_back(v);
      return Sort(SetOver{std::move(u)});
    }
    case ExprKind::ArrayIndex: {
      Sort s1 = sortOfExpr(e->a, ctx);
      if (s1.kind() != Sort::Kind::Array)
        throw LoadError("indexing a non-array expression");
      (void)intOf(e->b);
      return Sort(s1.arrayOf().elem);
    }
    case ExprKind::Length: {
      Sort s1 = sortOfExpr(e->a, ctx);
      if (s1.kind() != Sort::Kind::Array)
        throw LoadError("len() needs an array expression");
      long long n = static_cast<long long>(s1.arrayOf().length);
      return Sort(IntRange{n, n});
    }
    case ExprKind::Sum2: {
      Sort s1 = sortOfExpr(e->a, ctx);
      if (s1.kind() != Sort::Kind::Set)
        throw LoadError("sum2() needs a set expression");
      long long hi = 0;
      for (long long u : s1.setOver().universe)
        if (u >= 0 && u <= 62) hi = satAdd(hi, 1LL << u);
      return Sort(IntRange{0, hi});
    }
  }
  throw LoadError("unknown expression kind");
}

inline void checkBool(const BoolRef& b, const SortCtx& ctx) {
  if (!b) throw LoadError("null boolean expression");
  switch (b->kind) {
    case BoolKind::Lit:
      return;
    case BoolKind::Eq: {
      Sort s1 = sortOfExpr(b->e1, ctx), s2 = sortOfExpr(b->e2, ctx);
      if (s1.kind() != s2.kind())
        throw LoadError("comparing values of different kinds");
      if (s1.kind() == Sort::Kind::Array &&
          s1.arrayOf().length != s2.arrayOf().length)
        throw LoadError("comparing arrays of different lengths");
      return;
    }
    case BoolKind::Lt:
    case BoolKind::Le: {
      Sort s1 = sortOfExpr(b->e1, ctx), s2 = sortOfExpr(b->e2, ctx);
      if (s1.kind() != Sort::Kind::Int || s2.kind() != Sort::Kind::Int)
        throw LoadError("ordered comparison needs integer operands");
      return;
    }
    case BoolKind::Member: {
      Sort s1 = sortOfExpr(b->e1, ctx), s2 = sortOfExpr(b->e2, ctx);
      if (s1.kind() != Sort::Kind::Int || s2.kind() != Sort::Kind::Set)
        throw LoadError("membership needs an integer and a set");
      return;
    }
    case BoolKind::And:
    case BoolKind::Or:
      checkBool(b->b1, ctx);
      checkBool(b->b2, ctx);
      return;
    case BoolKind::Not:
      checkBool(b->b1, ctx);
      return;
  }
}

inline void checkStmt(const StmtRef& s, const ProgramDecl& decl) {
  SortCtx ctx{&decl, {}};
  if (!s) throw LoadError("null statement");
  switch (s->kind) {
    case StmtKind::Skip:
      return;
    case StmtKind::Assign: {
      const Sort* vs = decl.sortOf(s->var);
      if (!vs) {
        if (decl.isConst(s->var))
          throw LoadError("cannot assign to constant '" + s->var + "'");
        throw LoadError("undeclared variable '" + s->var + "'");
      }
      Sort es = sortOfExpr(s->e1, ctx);
      if (es.kind() != vs->kind())
        throw LoadError("assignment kind mismatch for '" + s->var + "'");
      if (es.kind() == Sort::Kind::Array &&
          es.arrayOf().length != vs->arrayOf().length)
        throw LoadError("assignment length mismatch for '" + s->var + "'");
      return;
    }
    case StmtKind::NondetAssign: {
      const Sort* vs = decl.sortOf(s->var);
      if (!vs) throw LoadError("undeclared variable '" + s->var + "'");
      if (vs->kind() != Sort::Kind::Int)
        throw LoadError("nondet target must be an integer variable");
      if (sortOfExpr(s->e1, ctx).kind() != Sort::Kind::Int ||
          sortOfExpr(s->e2, ctx).kind() != Sort::Kind::Int)
        throw LoadError("nondet bounds must be integers");
      return;
    }
    case StmtKind::Test:
    case StmtKind::Assert:
      checkBool(s->guard, ctx);
      return;
    case StmtKind::Choice:
      checkStmt(s->s1, decl);
      checkStmt(s->s2, decl);
      return;
    case StmtKind::While:
      checkBool(s->guard, ctx);
      checkStmt(s->s1, decl);
      return;
    case StmtKind::Seq:
      checkStmt(s->s1, decl);
      checkStmt(s->s2, decl);
      return;
  }
}

}  // namespace refine
