#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "refine/assertions.hpp"
#include "refine/execpred.hpp"
#include "refine/triples.hpp"
#include "refine/typecheck.hpp"

namespace refine {

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

namespace tok {

enum Kind { Ident, Keyword, Int, Punct, Directive, DirectiveEnd, Eof };

struct Token {
  Kind kind = Eof;
  std::string text;
  long long value = 0;
  SourcePos pos;
};

inline bool isKeyword(const std::string& s) {
  static const char* kws[] = {"skip",  "nondet", "assume", "assert", "choice",
                              "while", "if",     "then",   "else",   "var",
                              "const", "int",    "set",    "array",  "of",
                              "in",    "len",    "sum2",   "exists", "true",
                              "false", "Exec",   "prog",   "lowvar", "highvar"};
  for (const char* k : kws)
    if (s == k) return true;
  return false;
}

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  auto pos = [&] { return SourcePos{line, col}; };
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (src[i + j] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += k;
  };
  bool inDirective = false;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n' && inDirective) {
      out.push_back({DirectiveEnd, "", 0, pos()});
      inDirective = false;
      advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      std::size_t j = i + 2;
      while (j < src.size() && (src[j] == ' ' || src[j] == '\t')) ++j;
      if (j < src.size() && src[j] == '@') {
        // Directive comment: lex its name, then continue lexing the line.
        advance(j + 1 - i);
        std::string name;
        while (i < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[i])) ||
                src[i] == '_'))
          name += src[i], advance(1);
        out.push_back({Directive, name, 0, pos()});
        inDirective = true;
        continue;
      }
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    // UTF-8 set union sign
    if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < src.size() &&
        static_cast<unsigned char>(src[i + 1]) == 0x88 &&
        static_cast<unsigned char>(src[i + 2]) == 0xAA) {
      out.push_back({Punct, "\\/", 0, pos()});
      advance(3);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      Token t{Int, "", 0, pos()};
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
        t.text += src[i];
        advance(1);
      }
      t.value = std::stoll(t.text);
      out.push_back(t);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      Token t{Ident, "", 0, pos()};
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) ||
              src[i] == '_'))
        t.text += src[i], advance(1);
      if (isKeyword(t.text)) t.kind = Keyword;
      out.push_back(t);
      continue;
    }
    static const char* twoChar[] = {":=", "==", "!=", "<=", ">=", "<<",
                                    "&&", "||", "..", "->", "\\/"};
    bool matched = false;
    for (const char* p : twoChar) {
      if (src.compare(i, 2, p) == 0) {
        out.push_back({Punct, p, 0, pos()});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string oneChar = "+-*|<>(){}[];:,.=!@";
    if (oneChar.find(c) != std::string::npos) {
      out.push_back({Punct, std::string(1, c), 0, pos()});
      advance(1);
      continue;
    }
    throw LoadError(std::string("unexpected character '") + c + "'", pos());
  }
  if (inDirective) out.push_back({DirectiveEnd, "", 0, pos()});
  out.push_back({Eof, "", 0, pos()});
  return out;
}

}  // namespace tok

// ---------------------------------------------------------------------------
// Assertion sort checking (free functions; the prover re-checks directive
// assertions once script-introduced binders are in scope)
// ---------------------------------------------------------------------------

inline void checkAssertNoExec(const AssertRef& a, SortCtx& ctx) {
  switch (a->kind) {
    case AsrtKind::Pred:
      checkBool(a->pred, ctx);
      return;
    case AsrtKind::And:
    case AsrtKind::Or:
      checkAssertNoExec(a->a1, ctx);
      checkAssertNoExec(a->a2, ctx);
      return;
    case AsrtKind::Exists: {
      for (auto& [n, s] : ctx.logicals)
        if (n == a->binderName)
          throw LoadError("binder '" + n + "' shadows an enclosing binder");
      ctx.logicals.emplace_back(a->binderName, a->binderSort);
      checkAssertNoExec(a->a1, ctx);
      ctx.logicals.pop_back();
      return;
    }
    case AsrtKind::Exec:
      throw LoadError("Exec atom not allowed here");
  }
}

inline void checkAssertionRec(const AssertRef& a, SortCtx& lowCtx,
                              const ProgramDecl* high) {
  switch (a->kind) {
    case AsrtKind::Pred:
      checkBool(a->pred, lowCtx);
      return;
    case AsrtKind::And:
    case AsrtKind::Or:
      checkAssertionRec(a->a1, lowCtx, high);
      checkAssertionRec(a->a2, lowCtx, high);
      return;
    case AsrtKind::Exists: {
      for (auto& [n, s] : lowCtx.logicals)
        if (n == a->binderName)
          throw LoadError("binder '" + n + "' shadows an enclosing binder");
      lowCtx.logicals.emplace_back(a->binderName, a->binderSort);
      checkAssertionRec(a->a1, lowCtx, high);
      lowCtx.logicals.pop_back();
      return;
    }
    case AsrtKind::Exec: {
      if (!high)
        throw LoadError("Exec atom used without a high-level declaration");
      SortCtx highCtx{high, lowCtx.logicals};
      checkAssertNoExec(a->execHigh, highCtx);
      checkStmt(a->execProg, *high);
      return;
    }
  }
}

inline void checkAssertion(
    const AssertRef& a, const ProgramDecl& low, const ProgramDecl* high,
    const std::vector<std::pair<std::string, Sort>>& binders = {}) {
  SortCtx lowCtx{&low, binders};
  checkAssertionRec(a, lowCtx, high);
}

// ---------------------------------------------------------------------------
// Proof script items
// ---------------------------------------------------------------------------

struct ProofItem {
  enum Kind { Statement, WhileBlock, ChoiceBlock, ExecStep, AssertStep,
              InvariantStep, ExIntroStep } kind;
  StmtRef stmt;                  // Statement (atomic)
  BoolRef guard;                 // WhileBlock
  std::vector<ProofItem> body;   // WhileBlock body / ChoiceBlock left
  std::vector<ProofItem> body2;  // ChoiceBlock right
  RuleApp rule = ruleApp(ExecRule::Assign);  // ExecStep
  AssertRef assertion;           // AssertStep / InvariantStep
  std::string name;              // ExIntroStep
  SourcePos pos;
};

inline StmtRef eraseToProgram(const std::vector<ProofItem>& items) {
  StmtRef prog;
  auto append = [&](StmtRef s) { prog = prog ? seqOrSkip(prog, s) : s; };
  for (const auto& it : items) {
    switch (it.kind) {
      case ProofItem::Statement:
        append(it.stmt);
        break;
      case ProofItem::WhileBlock:
        append(whileStmt(it.guard, eraseToProgram(it.body)));
        break;
      case ProofItem::ChoiceBlock:
        append(choiceStmt(eraseToProgram(it.body), eraseToProgram(it.body2)));
        break;
      default:
        break;
    }
  }
  return prog ? prog : skipStmt();
}

// ---------------------------------------------------------------------------
// Parsed files
// ---------------------------------------------------------------------------

struct ProgFile {
  ProgramDecl decl;
  StmtRef body;
};

struct TripleFile {
  ProgramDecl lowDecl, highDecl;
  StmtRef lowProg, highProg;
  std::optional<RelTriple> rel;  // decomposed relational pre/post
  std::optional<StdTriple> std_; // unary (possibly Exec-bearing) pre/post
};

struct ProofFile {
  ProgramDecl lowDecl, highDecl;
  StmtRef highProg;
  AssertRef pre, post;
  std::vector<ProofItem> items;
  StmtRef lowProg;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
public:
  explicit Parser(const std::string& src) : toks_(tok::lex(src)) {}

  // --- entry points ---

  StmtRef parseStatementsToEof(const ProgramDecl& decl) {
    StmtRef s = parseStmtSeq();
    expectEof();
    checkStmt(s, decl);
    return s;
  }

  ProgFile parseProgFile() {
    ProgFile f;
    parseDecls(f.decl, f.decl, false);
    expectIdent("program");
    expectPunct("{");
    f.body = parseStmtSeq();
    expectPunct("}");
    expectEof();
    checkStmt(f.body, f.decl);
    return f;
  }

  TripleFile parseTripleFile() {
    TripleFile f;
    parseDecls(f.lowDecl, f.highDecl, true);
    if (peekIdent("low")) {
      next();
      expectPunct("{");
      f.lowProg = parseStmtSeq();
      expectPunct("}");
      checkStmt(f.lowProg, f.lowDecl);
    }
    if (peekIdent("high")) {
      next();
      expectPunct("{");
      f.highProg = parseStmtSeq();
      expectPunct("}");
      checkStmt(f.highProg, f.highDecl);
      highProg_ = f.highProg;
      highDecl_ = &f.highDecl;
    }
    lowDecl_ = &f.lowDecl;
    expectIdent("pre");
    expectPunct(":");
    std::size_t save = pos_;
    try {
      RelTriple rel;
      rel.pre = parseRelAssertion(f);
      expectIdent("post");
      expectPunct(":");
      rel.post = parseRelAssertion(f);
      rel.lowStmt = f.lowProg;
      f.rel = std::move(rel);
    } catch (const LoadError&) {
      pos_ = save;
      StdTriple st;
      st.pre = parseAssertion();
      expectIdent("post");
      expectPunct(":");
      st.post = parseAssertion();
      st.stmt = f.lowProg;
      checkAssertion(st.pre, f.lowDecl, &f.highDecl);
      checkAssertion(st.post, f.lowDecl, &f.highDecl);
      f.std_ = std::move(st);
    }
    expectEof();
    return f;
  }

  ProofFile parseProofFile() {
    ProofFile f;
    parseDecls(f.lowDecl, f.highDecl, true);
    if (peekIdent("high")) {
      next();
      expectPunct("{");
      f.highProg = parseStmtSeq();
      expectPunct("}");
      checkStmt(f.highProg, f.highDecl);
      highProg_ = f.highProg;
      highDecl_ = &f.highDecl;
    }
    lowDecl_ = &f.lowDecl;
    expectIdent("pre");
    expectPunct(":");
    f.pre = parseAssertion();
    checkAssertion(f.pre, f.lowDecl, &f.highDecl);
    expectIdent("post");
    expectPunct(":");
    f.post = parseAssertion();
    checkAssertion(f.post, f.lowDecl, &f.highDecl);
    expectIdent("proof");
    expectPunct("{");
    f.items = parseProofItems();
    expectPunct("}");
    expectEof();
    f.lowProg = eraseToProgram(f.items);
    checkStmt(f.lowProg, f.lowDecl);
    return f;
  }

  // Standalone assertion (for tests); checked against the given decls.
  AssertRef parseAssertionChecked(const ProgramDecl& low,
                                  const ProgramDecl* high,
                                  StmtRef highProg = nullptr) {
    highProg_ = std::move(highProg);
    highDecl_ = high;
    lowDecl_ = &low;
    AssertRef a = parseAssertion();
    expectEof();
    checkAssertion(a, low, high);
    return a;
  }

private:
  // --- token helpers ---
  const tok::Token& cur() const { return toks_[pos_]; }
  const tok::Token& next() { return toks_[pos_++]; }
  bool peekPunct(const char* p) const {
    return cur().kind == tok::Punct && cur().text == p;
  }
  bool peekKeyword(const char* k) const {
    return cur().kind == tok::Keyword && cur().text == k;
  }
  bool peekIdent(const char* t) const {
    return cur().kind == tok::Ident && cur().text == t;
  }
  bool acceptPunct(const char* p) {
    if (peekPunct(p)) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool acceptKeyword(const char* k) {
    if (peekKeyword(k)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expectPunct(const char* p) {
    if (!acceptPunct(p))
      throw LoadError("expected '" + std::string(p) + "', found '" +
                          cur().text + "'",
                      cur().pos);
  }
  void expectKeyword(const char* k) {
    if (!acceptKeyword(k))
      throw LoadError("expected '" + std::string(k) + "'", cur().pos);
  }
  void expectIdent(const char* t) {
    if (!peekIdent(t))
      throw LoadError("expected '" + std::string(t) + "', found '" +
                          cur().text + "'",
                      cur().pos);
    ++pos_;
  }
  void expectEof() {
    if (cur().kind != tok::Eof)
      throw LoadError("unexpected trailing input '" + cur().text + "'",
                      cur().pos);
  }
  std::string expectName() {
    if (cur().kind != tok::Ident)
      throw LoadError("expected an identifier, found '" + cur().text + "'",
                      cur().pos);
    return next().text;
  }
  long long expectInt() {
    bool neg = acceptPunct("-");
    if (cur().kind != tok::Int)
      throw LoadError("expected an integer", cur().pos);
    long long v = next().value;
    return neg ? -v : v;
  }

  // --- sorts, values, declarations ---

  Sort parseSort() {
    if (acceptKeyword("int")) {
      expectPunct("[");
      long long lo = expectInt();
      expectPunct("..");
      long long hi = expectInt();
      expectPunct("]");
      return Sort(IntRange{lo, hi});
    }
    if (acceptKeyword("set")) {
      expectPunct("{");
      std::vector<long long> u;
      if (!peekPunct("}")) {
        long long first = expectInt();
        if (acceptPunct("..")) {
          long long last = expectInt();
          for (long long v = first; v <= last; ++v) u.push_back(v);
        } else {
          u.push_back(first);
          while (acceptPunct(",")) u.push_back(expectInt());
        }
      }
      expectPunct("}");
      return Sort(SetOver{std::move(u)});
    }
    if (acceptKeyword("array")) {
      expectPunct("[");
      long long n = expectInt();
      expectPunct("]");
      expectKeyword("of");
      expectKeyword("int");
      expectPunct("[");
      long long lo = expectInt();
      expectPunct("..");
      long long hi = expectInt();
      expectPunct("]");
      if (n < 1) throw LoadError("array length must be positive", cur().pos);
      return Sort(ArrayOf{static_cast<std::size_t>(n), IntRange{lo, hi}});
    }
    throw LoadError("expected a sort", cur().pos);
  }

  Value parseValue() {
    if (acceptPunct("{")) {
      std::vector<long long> elems;
      if (!peekPunct("}")) {
        elems.push_back(expectInt());
        while (acceptPunct(",")) elems.push_back(expectInt());
      }
      expectPunct("}");
      return Value(makeSet(std::move(elems)));
    }
    if (acceptPunct("[")) {
      std::vector<long long> elems;
      if (!peekPunct("]")) {
        elems.push_back(expectInt());
        while (acceptPunct(",")) elems.push_back(expectInt());
      }
      expectPunct("]");
      return Value(ArrayVal{std::move(elems)});
    }
    return Value(expectInt());
  }

  void parseDecls(ProgramDecl& low, ProgramDecl& high, bool split) {
    auto dup = [&](const ProgramDecl& d, const std::string& n) {
      return d.sortOf(n) != nullptr || d.isConst(n);
    };
    for (;;) {
      if (acceptKeyword("var") || (!split && acceptKeyword("lowvar"))) {
        std::string n = expectName();
        expectPunct(":");
        Sort s = parseSort();
        expectPunct(";");
        if (dup(low, n)) throw LoadError("duplicate declaration '" + n + "'");
        low.vars.emplace_back(n, s);
        if (split && &low != &high) {
          // plain 'var' in a two-sided file is rejected for clarity
          throw LoadError("use lowvar/highvar in two-sided files", cur().pos);
        }
      } else if (split && acceptKeyword("lowvar")) {
        std::string n = expectName();
        expectPunct(":");
        Sort s = parseSort();
        expectPunct(";");
        if (dup(low, n)) throw LoadError("duplicate declaration '" + n + "'");
        low.vars.emplace_back(n, s);
      } else if (acceptKeyword("highvar")) {
        std::string n = expectName();
        expectPunct(":");
        Sort s = parseSort();
        expectPunct(";");
        if (dup(high, n)) throw LoadError("duplicate declaration '" + n + "'");
        high.vars.emplace_back(n, s);
      } else if (acceptKeyword("const")) {
        std::string n = expectName();
        expectPunct(":");
        Sort s = parseSort();
        expectPunct("=");
        Value v = parseValue();
        expectPunct(";");
        if (!s.contains(v))
          throw LoadError("constant '" + n + "' is outside its sort");
        if (dup(low, n) || dup(high, n))
          throw LoadError("duplicate declaration '" + n + "'");
        low.constants[n] = v;
        if (&low != &high) high.constants[n] = v;  // constants are shared
      } else {
        break;
      }
    }
  }

  // --- expressions ---

  ExprRef parseExpr() { return parseOrUnion(); }

  ExprRef parseOrUnion() {
    ExprRef e = parseShift();
    for (;;) {
      if (acceptPunct("|"))
        e = mkExpr(ExprKind::BitOr, e, parseShift());
      else if (acceptPunct("\\/"))
        e = mkExpr(ExprKind::SetUnion, e, parseShift());
      else
        return e;
    }
  }
  ExprRef parseShift() {
    ExprRef e = parseAdditive();
    while (acceptPunct("<<")) e = mkExpr(ExprKind::Shl, e, parseAdditive());
    return e;
  }
  ExprRef parseAdditive() {
    ExprRef e = parseMul();
    for (;;) {
      if (acceptPunct("+"))
        e = mkExpr(ExprKind::Add, e, parseMul());
      else if (acceptPunct("-"))
        e = mkExpr(ExprKind::Sub, e, parseMul());
      else
        return e;
    }
  }
  ExprRef parseMul() {
    ExprRef e = parsePostfix();
    while (acceptPunct("*")) e = mkExpr(ExprKind::Mul, e, parsePostfix());
    return e;
  }
  ExprRef parsePostfix() {
    ExprRef e = parsePrimary();
    while (acceptPunct("[")) {
      ExprRef idx = parseExpr();
      expectPunct("]");
      e = mkExpr(ExprKind::ArrayIndex, e, idx);
    }
    return e;
  }
  ExprRef parsePrimary() {
    if (cur().kind == tok::Int) return intLit(next().value);
    if (peekPunct("-")) {
      ++pos_;
      if (cur().kind != tok::Int)
        throw LoadError("expected an integer after '-'", cur().pos);
      return intLit(-next().value);
    }
    if (acceptKeyword("len")) {
      expectPunct("(");
      ExprRef e = parseExpr();
      expectPunct(")");
      return mkExpr(ExprKind::Length, e);
    }
    if (acceptKeyword("sum2")) {
      expectPunct("(");
      ExprRef e = parseExpr();
      expectPunct(")");
      return mkExpr(ExprKind::Sum2, e);
    }
    if (cur().kind == tok::Ident) return varRef(next().text);
    if (acceptPunct("(")) {
      ExprRef e = parseExpr();
      expectPunct(")");
      return e;
    }
    if (acceptPunct("{")) {
      if (acceptPunct("}")) return setLit(SetVal{});
      std::vector<ExprRef> elems;
      elems.push_back(parseExpr());
      while (acceptPunct(",")) elems.push_back(parseExpr());
      expectPunct("}");
      bool allLits = true;
      for (auto& e : elems)
        if (e->kind != ExprKind::IntLit) allLits = false;
      if (allLits) {
        std::vector<long long> vals;
        for (auto& e : elems) vals.push_back(e->intVal);
        return setLit(makeSet(std::move(vals)));
      }
      ExprRef s = mkExpr(ExprKind::SetSingleton, elems[0]);
      for (std::size_t i = 1; i < elems.size(); ++i)
        s = mkExpr(ExprKind::SetUnion, s, mkExpr(ExprKind::SetSingleton, elems[i]));
      return s;
    }
    throw LoadError("expected an expression, found '" + cur().text + "'",
                    cur().pos);
  }

  // --- boolean expressions ---

  BoolRef parseBoolExpr() { return parseBoolOr(); }
  BoolRef parseBoolOr() {
    BoolRef b = parseBoolAnd();
    while (acceptPunct("||")) b = mkBool(BoolKind::Or, b, parseBoolAnd());
    return b;
  }
  BoolRef parseBoolAnd() {
    BoolRef b = parseBoolNot();
    while (acceptPunct("&&")) b = mkBool(BoolKind::And, b, parseBoolNot());
    return b;
  }
  BoolRef parseBoolNot() {
    if (acceptPunct("!")) return mkNot(parseBoolNot());
    return parseBoolAtom();
  }
  BoolRef parseBoolAtom() {
    if (acceptKeyword("true")) return boolLit(true);
    if (acceptKeyword("false")) return boolLit(false);
    if (peekPunct("(")) {
      std::size_t save = pos_;
      try {
        ++pos_;
        BoolRef b = parseBoolExpr();
        expectPunct(")");
        if (comparatorNext())
          throw LoadError("parenthesized boolean followed by comparator",
                          cur().pos);
        return b;
      } catch (const LoadError&) {
        pos_ = save;
      }
    }
    return parseComparison();
  }
  bool comparatorNext() const {
    if (cur().kind == tok::Keyword && cur().text == "in") return true;
    if (cur().kind != tok::Punct) return false;
    const std::string& t = cur().text;
    return t == "==" || t == "!=" || t == "<" || t == "<=" || t == ">" ||
           t == ">=" || t == "+" || t == "-" || t == "*" || t == "|" ||
           t == "<<" || t == "\\/" || t == "[";
  }
  BoolRef parseComparison() {
    ExprRef a = parseExpr();
    if (acceptPunct("==")) return mkCmp(BoolKind::Eq, a, parseExpr());
    if (acceptPunct("!=")) return mkNot(mkCmp(BoolKind::Eq, a, parseExpr()));
    if (acceptPunct("<=")) return mkCmp(BoolKind::Le, a, parseExpr());
    if (acceptPunct("<")) return mkCmp(BoolKind::Lt, a, parseExpr());
    if (acceptPunct(">=")) return mkCmp(BoolKind::Le, parseExpr(), a);
    if (acceptPunct(">")) return mkCmp(BoolKind::Lt, parseExpr(), a);
    if (acceptKeyword("in")) return mkCmp(BoolKind::Member, a, parseExpr());
    throw LoadError("expected a comparison operator", cur().pos);
  }

  // --- statements ---

  bool stmtStarts() const {
    if (cur().kind == tok::Ident) return true;
    if (cur().kind != tok::Keyword) return false;
    const std::string& t = cur().text;
    return t == "skip" || t == "assume" || t == "assert" || t == "choice" ||
           t == "while" || t == "if";
  }

  StmtRef parseStmtSeq() {
    std::vector<StmtRef> stmts;
    while (stmtStarts()) stmts.push_back(parseOneStmt());
    if (stmts.empty()) return skipStmt();
    StmtRef s = stmts.back();
    for (std::size_t i = stmts.size() - 1; i-- > 0;)
      s = seqOrSkip(stmts[i], s);
    return s;
  }

  StmtRef parseOneStmt() {
    if (acceptKeyword("skip")) {
      acceptPunct(";");
      return skipStmt();
    }
    if (acceptKeyword("assume")) {
      expectPunct("(");
      BoolRef g = parseBoolExpr();
      expectPunct(")");
      acceptPunct(";");
      return testStmt(g);
    }
    if (acceptKeyword("assert")) {
      expectPunct("(");
      BoolRef g = parseBoolExpr();
      expectPunct(")");
      acceptPunct(";");
      return assertStmt(g);
    }
    if (acceptKeyword("choice")) {
      expectPunct("(");
      StmtRef a = parseStmtSeq();
      expectPunct(",");
      StmtRef b = parseStmtSeq();
      expectPunct(")");
      acceptPunct(";");
      return choiceStmt(a, b);
    }
    if (acceptKeyword("while")) {
      expectPunct("(");
      BoolRef g = parseBoolExpr();
      expectPunct(")");
      expectPunct("{");
      StmtRef body = parseStmtSeq();
      expectPunct("}");
      return whileStmt(g, body);
    }
    if (acceptKeyword("if")) {
      expectPunct("(");
      BoolRef g = parseBoolExpr();
      expectPunct(")");
      expectKeyword("then");
      expectPunct("{");
      StmtRef a = parseStmtSeq();
      expectPunct("}");
      expectKeyword("else");
      expectPunct("{");
      StmtRef b = parseStmtSeq();
      expectPunct("}");
      return choiceStmt(seqOrSkip(testStmt(g), a),
                        seqOrSkip(testStmt(mkNot(g)), b));
    }
    // assignment
    std::string v = expectName();
    if (!acceptPunct(":=")) expectPunct("=");
    if (acceptKeyword("nondet")) {
      expectPunct("(");
      ExprRef lo = parseExpr();
      expectPunct(",");
      ExprRef hi = parseExpr();
      expectPunct(")");
      acceptPunct(";");
      return nondetStmt(v, lo, hi);
    }
    ExprRef e = parseExpr();
    acceptPunct(";");
    return assignStmt(v, e);
  }

  // --- assertions ---

  StmtRef parseExecProg() {
    if (acceptPunct("@")) {
      expectIdent("high");
      if (!highProg_)
        throw LoadError("'@high' used before the high program is declared",
                        cur().pos);
      return highProg_;
    }
    return parseStmtSeq();
  }

  AssertRef parseAssertion() { return parseAssertOr(); }
  AssertRef parseAssertOr() {
    AssertRef a = parseAssertAnd();
    while (acceptPunct("||")) a = orAssert(a, parseAssertAnd());
    return a;
  }
  AssertRef parseAssertAnd() {
    AssertRef a = parseAssertAtom();
    while (acceptPunct("&&")) a = andAssert(a, parseAssertAtom());
    return a;
  }
  std::vector<std::pair<std::string, Sort>> parseBinders() {
    std::vector<std::pair<std::string, Sort>> binders;
    do {
      std::string n = expectName();
      expectPunct(":");
      binders.emplace_back(n, parseSort());
    } while (acceptPunct(","));
    expectPunct(".");
    return binders;
  }
  AssertRef parseAssertAtom() {
    if (acceptKeyword("exists")) {
      auto binders = parseBinders();
      AssertRef body = parseAssertOr();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it)
        body = existsAssert(it->first, it->second, body);
      return body;
    }
    if (acceptKeyword("Exec")) {
      expectPunct("[");
      AssertRef high = parseAssertOr();
      expectPunct(";");
      StmtRef prog = parseExecProg();
      expectPunct("]");
      if (containsExec(high))
        throw LoadError("Exec atoms cannot nest", cur().pos);
      return execAssert(high, prog);
    }
    if (peekPunct("(")) {
      std::size_t save = pos_;
      try {
        ++pos_;
        AssertRef a = parseAssertOr();
        expectPunct(")");
        if (comparatorNext())
          throw LoadError("parenthesized assertion followed by comparator",
                          cur().pos);
        return a;
      } catch (const LoadError&) {
        pos_ = save;
      }
    }
    return predAssert(parseBoolNot());
  }

  // Relational (decomposed) assertions for triple files.
  DecomposedRel parseRelAssertion(const TripleFile& f) {
    DecomposedRel rel;
    rel.disjuncts.push_back(parseRelDisjunct(f));
    while (acceptPunct("||")) rel.disjuncts.push_back(parseRelDisjunct(f));
    return rel;
  }

  RelDisjunct parseRelDisjunct(const TripleFile& f) {
    RelDisjunct d;
    if (acceptKeyword("exists")) d.binders = parseBinders();
    bool sawProg = false;
    do {
      if (peekIdent("low")) {
        next();
        expectPunct("(");
        AssertRef a = parseAssertOr();
        expectPunct(")");
        if (containsExec(a))
          throw LoadError("Exec atom inside a low() part", cur().pos);
        d.low = d.low ? andAssert(d.low, a) : a;
      } else if (peekIdent("high")) {
        next();
        expectPunct("(");
        AssertRef a = parseAssertOr();
        expectPunct(")");
        if (containsExec(a))
          throw LoadError("Exec atom inside a high() part", cur().pos);
        d.high = d.high ? andAssert(d.high, a) : a;
      } else if (peekIdent("pure")) {
        next();
        expectPunct("(");
        BoolRef b = parseBoolExpr();
        expectPunct(")");
        d.pure = d.pure ? mkBool(BoolKind::And, d.pure, b) : b;
      } else if (acceptKeyword("prog")) {
        if (sawProg) throw LoadError("duplicate prog part", cur().pos);
        sawProg = true;
        if (acceptKeyword("skip")) {
          d.prog = skipStmt();
        } else if (acceptPunct("@")) {
          expectIdent("high");
          if (!highProg_) throw LoadError("no high program declared");
          d.prog = highProg_;
        } else {
          expectPunct("{");
          d.prog = parseStmtSeq();
          expectPunct("}");
        }
        checkStmt(d.prog, f.highDecl);
      } else {
        throw LoadError("expected low(...), high(...), pure(...) or prog",
                        cur().pos);
      }
    } while (acceptPunct("&&"));
    if (!sawProg) throw LoadError("relational disjunct needs a prog part");
    if (!d.low) d.low = trueAssert();
    if (!d.high) d.high = trueAssert();
    if (!d.pure) d.pure = boolLit(true);
    SortCtx lowCtx{&f.lowDecl, {}};
    SortCtx highCtx{&f.highDecl, {}};
    for (auto& [n, s] : d.binders) {
      lowCtx.logicals.emplace_back(n, s);
      highCtx.logicals.emplace_back(n, s);
    }
    checkAssertNoExec(d.low, lowCtx);
    checkAssertNoExec(d.high, highCtx);
    ProgramDecl pureDecl;  // constants only
    pureDecl.constants = f.lowDecl.constants;
    SortCtx pureCtx{&pureDecl, lowCtx.logicals};
    checkBool(d.pure, pureCtx);
    return d;
  }

  // --- proof items ---

  std::vector<ProofItem> parseProofItems() {
    std::vector<ProofItem> items;
    for (;;) {
      if (cur().kind == tok::Directive) {
        items.push_back(parseDirective());
        continue;
      }
      if (!stmtStarts()) break;
      SourcePos p = cur().pos;
      if (acceptKeyword("while")) {
        ProofItem it;
        it.kind = ProofItem::WhileBlock;
        it.pos = p;
        expectPunct("(");
        it.guard = parseBoolExpr();
        expectPunct(")");
        expectPunct("{");
        it.body = parseProofItems();
        expectPunct("}");
        items.push_back(std::move(it));
        continue;
      }
      if (acceptKeyword("choice")) {
        ProofItem it;
        it.kind = ProofItem::ChoiceBlock;
        it.pos = p;
        expectPunct("(");
        it.body = parseProofItems();
        expectPunct(",");
        it.body2 = parseProofItems();
        expectPunct(")");
        acceptPunct(";");
        items.push_back(std::move(it));
        continue;
      }
      if (acceptKeyword("if")) {
        ProofItem it;
        it.kind = ProofItem::ChoiceBlock;
        it.pos = p;
        expectPunct("(");
        BoolRef g = parseBoolExpr();
        expectPunct(")");
        expectKeyword("then");
        ProofItem guardItem;
        guardItem.kind = ProofItem::Statement;
        guardItem.stmt = testStmt(g);
        guardItem.pos = p;
        expectPunct("{");
        it.body = parseProofItems();
        expectPunct("}");
        it.body.insert(it.body.begin(), guardItem);
        expectKeyword("else");
        ProofItem guardItem2;
        guardItem2.kind = ProofItem::Statement;
        guardItem2.stmt = testStmt(mkNot(g));
        guardItem2.pos = p;
        expectPunct("{");
        it.body2 = parseProofItems();
        expectPunct("}");
        it.body2.insert(it.body2.begin(), guardItem2);
        items.push_back(std::move(it));
        continue;
      }
      ProofItem it;
      it.kind = ProofItem::Statement;
      it.pos = p;
      it.stmt = parseOneStmt();
      items.push_back(std::move(it));
    }
    return items;
  }

  ProofItem parseDirective() {
    ProofItem it;
    it.pos = cur().pos;
    std::string name = next().text;  // Directive token
    if (name == "exec") {
      it.kind = ProofItem::ExecStep;
      it.rule = parseRuleApp();
    } else if (name == "assert") {
      it.kind = ProofItem::AssertStep;
      it.assertion = parseAssertion();  // checked by the prover, which knows
                                        // the script binders in scope
    } else if (name == "invariant") {
      it.kind = ProofItem::InvariantStep;
      it.assertion = parseAssertion();
    } else if (name == "exintro") {
      it.kind = ProofItem::ExIntroStep;
      it.name = expectName();
    } else {
      throw LoadError("unknown directive '@" + name + "'", it.pos);
    }
    if (cur().kind != tok::DirectiveEnd)
      throw LoadError("trailing tokens after directive", cur().pos);
    ++pos_;
    return it;
  }

  std::string parseRuleName() {
    std::string name =
        (cur().kind == tok::Ident || cur().kind == tok::Keyword)
            ? next().text
            : throw LoadError("expected a rule name", cur().pos);
    while (peekPunct("-")) {
      ++pos_;
      name += "-" + ((cur().kind == tok::Ident || cur().kind == tok::Keyword)
                         ? next().text
                         : throw LoadError("bad rule name", cur().pos));
    }
    return name;
  }

  RuleApp parseRuleApp() {
    std::string name = parseRuleName();
    if (name == "assign") return ruleApp(ExecRule::Assign);
    if (name == "choice-left") return ruleApp(ExecRule::ChoiceL);
    if (name == "choice-right") return ruleApp(ExecRule::ChoiceR);
    if (name == "assume") return ruleApp(ExecRule::Assume);
    if (name == "assert") return ruleApp(ExecRule::AssertStep);
    if (name == "while-unroll") return ruleApp(ExecRule::WhileUnroll);
    if (name == "while-end") return ruleApp(ExecRule::WhileEnd);
    if (name == "nondet") {
      RuleApp r = ruleApp(ExecRule::Nondet);
      r.nondetValue = parseExpr();
      return r;
    }
    if (name == "focus") {
      RuleApp r = ruleApp(ExecRule::FocusAngelic);
      expectPunct("{");
      r.focusIntermediate = parseAssertOr();
      expectPunct("}");
      if (containsExec(r.focusIntermediate))
        throw LoadError("focus assertion cannot contain Exec atoms");
      return r;
    }
    if (name == "pure") {
      RuleApp r = ruleApp(ExecRule::Pure);
      expectPunct("->");
      expectPunct("{");
      r.pureReplacement = parseStmtSeq();
      expectPunct("}");
      if (highDecl_) checkStmt(r.pureReplacement, *highDecl_);
      if (peekIdent("via")) {
        next();
        r.pureSemantic = false;
        expectPunct("[");
        r.nested.push_back(parseRuleApp());
        while (acceptPunct(";")) r.nested.push_back(parseRuleApp());
        expectPunct("]");
      }
      return r;
    }
    if (name == "seq") {
      RuleApp r = ruleApp(ExecRule::SeqStep);
      expectPunct("[");
      r.nested.push_back(parseRuleApp());
      while (acceptPunct(";")) r.nested.push_back(parseRuleApp());
      expectPunct("]");
      return r;
    }
    throw LoadError("unknown exec rule '" + name + "'");
  }

  std::vector<tok::Token> toks_;
  std::size_t pos_ = 0;
  StmtRef highProg_;
  const ProgramDecl* highDecl_ = nullptr;
  const ProgramDecl* lowDecl_ = nullptr;
};

// Convenience wrappers.

inline StmtRef parseProgramText(const std::string& text,
                                const ProgramDecl& decl) {
  Parser p(text);
  return p.parseStatementsToEof(decl);
}

inline ProgFile parseProgFile(const std::string& text) {
  Parser p(text);
  return p.parseProgFile();
}

inline TripleFile parseTripleFile(const std::string& text) {
  Parser p(text);
  return p.parseTripleFile();
}

inline ProofFile parseProofFile(const std::string& text) {
  Parser p(text);
  return p.parseProofFile();
}

}  // namespace refine
