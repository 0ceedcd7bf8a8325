#pragma once

#include <sstream>
#include <string>

#include "refine/ast.hpp"

namespace refine {

// Canonical, re-parseable text forms. The printers emit core syntax only
// (if/else sugar is already desugared in the AST).

namespace detail {

// Tighter binds higher: 4 postfix, 3 mul, 2 add, 1 shift, 0 or/union.
inline int exprPrec(ExprKind k) {
  switch (k) {
    case ExprKind::Mul: return 3;
    case ExprKind::Add:
    case ExprKind::Sub: return 2;
    case ExprKind::Shl: return 1;
    case ExprKind::BitOr:
    case ExprKind::SetUnion: return 0;
    default: return 4;
  }
}

}  // namespace detail

inline std::string printExpr(const ExprRef& e, int parentPrec = -1) {
  using detail::exprPrec;
  std::ostringstream os;
  int prec = exprPrec(e->kind);
  std::string s;
  switch (e->kind) {
    case ExprKind::IntLit:
      s = std::to_string(e->intVal);
      break;
    case ExprKind::SetLit: {
      std::ostringstream t;
      t << '{';
      for (std::size_t i = 0; i < e->setVal.elems.size(); ++i) {
        if (i) t << ',';
        t << e->setVal.elems[i];
      }
      t << '}';
      s = t.str();
      break;
    }
    case ExprKind::Var:
      s = e->name;
      break;
    case ExprKind::Add:
      s = printExpr(e->a, prec) + " + " + printExpr(e->b, prec + 1);
      break;
    case ExprKind::Sub:
      s = printExpr(e->a, prec) + " - " + printExpr(e->b, prec + 1);
      break;
    case ExprKind::Mul:
      s = printExpr(e->a, prec) + " * " + printExpr(e->b, prec + 1);
      break;
    case ExprKind::BitOr:
      s = printExpr(e->a, prec) + " | " + printExpr(e->b, prec + 1);
      break;
    case ExprKind::Shl:
      s = printExpr(e->a, prec) + " << " + printExpr(e->b, prec + 1);
      break;
    case ExprKind::SetUnion:
      s = printExpr(e->a, prec) + " \\/ " + printExpr(e->b, prec + 1);
      break;
    case ExprKind::SetSingleton:
      s = "{ " + printExpr(e->a) + " }";
      break;
    case ExprKind::ArrayIndex:
      s = printExpr(e->a, 4) + "[" + printExpr(e->b) + "]";
      break;
    case ExprKind::Length:
      s = "len(" + printExpr(e->a) + ")";
      break;
    case ExprKind::Sum2:
      s = "sum2(" + printExpr(e->a) + ")";
      break;
  }
  if (prec < parentPrec) return "(" + s + ")";
  return s;
}

inline std::string printBool(const BoolRef& b, int parentPrec = 0) {
  // 0 or, 1 and, 2 atom
  int prec = 2;
  std::string s;
  switch (b->kind) {
    case BoolKind::Lit:
      prec = 2;
      s = b->lit ? "true" : "false";
      break;
    case BoolKind::Eq:
      prec = 2;
      s = printExpr(b->e1) + " == " + printExpr(b->e2);
      break;
    case BoolKind::Lt:
      prec = 2;
      s = printExpr(b->e1) + " < " + printExpr(b->e2);
      break;
    case BoolKind::Le:
      prec = 2;
      s = printExpr(b->e1) + " <= " + printExpr(b->e2);
      break;
    case BoolKind::Member:
      prec = 2;
      s = printExpr(b->e1) + " in " + printExpr(b->e2);
      break;
    case BoolKind::And:
      prec = 1;
      s = printBool(b->b1, 1) + " && " + printBool(b->b2, 2);
      break;
    case BoolKind::Or:
      prec = 0;
      s = printBool(b->b1, 0) + " || " + printBool(b->b2, 1);
      break;
    case BoolKind::Not:
      prec = 2;
      s = "!(" + printBool(b->b1) + ")";
      break;
  }
  if (prec < parentPrec) return "(" + s + ")";
  return s;
}

inline std::string printStmt(const StmtRef& s) {
  switch (s->kind) {
    case StmtKind::Skip:
      return "skip;";
    case StmtKind::Assign:
      return s->var + " := " + printExpr(s->e1) + ";";
    case StmtKind::NondetAssign:
      return s->var + " := nondet(" + printExpr(s->e1) + ", " +
             printExpr(s->e2) + ");";
    case StmtKind::Test:
      return "assume(" + printBool(s->guard) + ");";
    case StmtKind::Assert:
      return "assert(" + printBool(s->guard) + ");";
    case StmtKind::Choice:
      return "choice(" + printStmt(s->s1) + " , " + printStmt(s->s2) + ")";
    case StmtKind::While:
      return "while (" + printBool(s->guard) + ") { " + printStmt(s->s1) + " }";
    case StmtKind::Seq:
      return printStmt(s->s1) + " " + printStmt(s->s2);
  }
  return "";
}

inline std::string printSort(const Sort& s) {
  std::ostringstream os;
  switch (s.kind()) {
    case Sort::Kind::Int:
      os << "int[" << s.intRange().lo << ".." << s.intRange().hi << "]";
      break;
    case Sort::Kind::Set: {
      os << "set{";
      const auto& u = s.setOver().universe;
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (i) os << ',';
        os << u[i];
      }
      os << '}';
      break;
    }
    case Sort::Kind::Array:
      os << "array[" << s.arrayOf().length << "] of int[" << s.arrayOf().elem.lo
         << ".." << s.arrayOf().elem.hi << "]";
      break;
  }
  return os.str();
}

}  // namespace refine
