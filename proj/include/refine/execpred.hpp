#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "refine/assertions.hpp"

namespace refine {

// Ground form of the execution predicate: the satisfying high-level states
// of its assertion, plus the remaining high-level program.
struct GroundExec {
  StateSet states;  // over the high space
  StmtRef prog;
};

enum class ExecRule {
  Assign,
  Nondet,
  ChoiceL,
  ChoiceR,
  Assume,
  AssertStep,
  WhileEnd,
  WhileUnroll,
  Pure,
  SeqStep,
  FocusAngelic,
};

inline const char* execRuleName(ExecRule r) {
  switch (r) {
    case ExecRule::Assign: return "assign";
    case ExecRule::Nondet: return "nondet";
    case ExecRule::ChoiceL: return "choice-left";
    case ExecRule::ChoiceR: return "choice-right";
    case ExecRule::Assume: return "assume";
    case ExecRule::AssertStep: return "assert";
    case ExecRule::WhileEnd: return "while-end";
    case ExecRule::WhileUnroll: return "while-unroll";
    case ExecRule::Pure: return "pure";
    case ExecRule::SeqStep: return "seq";
    case ExecRule::FocusAngelic: return "focus";
  }
  return "?";
}

// One rule application with exactly the side data its rule needs. Rule
// applications never inspect X; that is the point of the encoding and is
// enforced by this type carrying no X.
struct RuleApp {
  ExecRule rule;
  ExprRef nondetValue;          // Nondet: chosen value (consts and binders only)
  StmtRef pureReplacement;      // Pure: the replacement program
  std::vector<RuleApp> nested;  // Pure / SeqStep: nested certificate chain
  bool pureSemantic = true;     // Pure: discharge premise by config refinement
  AssertRef focusIntermediate;  // FocusAngelic: intermediate high assertion
};

inline RuleApp ruleApp(ExecRule r) { return RuleApp{r, nullptr, nullptr, {}, true, nullptr}; }

struct RuleError {
  enum Kind { HeadMismatch, SideConditionFails, NondetOutOfRange, BadCertificate };
  Kind kind;
  std::string message;
  std::optional<std::uint64_t> witness;  // offending high state, if any
};

using RuleResult = std::variant<GroundExec, RuleError>;

inline bool ruleOk(const RuleResult& r) {
  return std::holds_alternative<GroundExec>(r);
}

// Angelic triple: from every pre state the program can avoid errors and
// reach some post state.
struct AngelicResult {
  bool valid = true;
  std::optional<std::uint64_t> witness;  // pre state with no successful run
};

inline AngelicResult angelicValid(Interp& interp, const StateSet& pre,
                                  const StmtRef& c, const StateSet& post) {
  const Denotation& d = interp.denote(c);
  for (std::size_t s = pre.find_first(); s != StateSet::npos;
       s = pre.find_next(s)) {
    if (d.err.test(s)) return {false, s};
    if (!(d.nrm[s] & post).any()) return {false, s};
  }
  return {true, std::nullopt};
}

inline RuleResult applyRule(const GroundExec& p, const RuleApp& r,
                            Interp& high, const LogicalEnv& env);

inline RuleResult applyChain(GroundExec p, const std::vector<RuleApp>& chain,
                             Interp& high, const LogicalEnv& env) {
  for (const auto& r : chain) {
    RuleResult next = applyRule(p, r, high, env);
    if (!ruleOk(next)) return next;
    p = std::get<GroundExec>(std::move(next));
  }
  return p;
}

namespace detail {

// Evaluates a rule argument; it may reference logical binders and the high
// declaration's constants, never program variables.
inline std::optional<Value> evalRuleArg(const ExprRef& e,
                                        const ProgramDecl& decl,
                                        const LogicalEnv& env) {
  LogicalEnv ext;
  ext.reserve(decl.constants.size() + env.size());
  for (auto& [name, v] : decl.constants) ext.emplace_back(name, v);
  for (auto& [name, v] : env) ext.emplace_back(name, v);
  EvalEnv ee{nullptr, 0, &ext};
  return evalExpr(e, ee);
}

// Applies a rule to an un-sequenced head statement. Returns the new ground
// predicate whose prog is the head's replacement (skip when consumed).
inline RuleResult applyAtHead(const StateSet& states, const StmtRef& head,
                              const RuleApp& r, Interp& high,
                              const LogicalEnv& env) {
  const StateSpace& space = high.space();
  auto mismatch = [&](const char* want) -> RuleResult {
    return RuleError{RuleError::HeadMismatch,
                     std::string("rule '") + execRuleName(r.rule) +
                         "' expects the high program to start with " + want,
                     std::nullopt};
  };
  switch (r.rule) {
    case ExecRule::Assign: {
      if (head->kind != StmtKind::Assign) return mismatch("an assignment");
      int vi = space.indexOfVar(head->var);
      StateSet image(space.size());
      for (std::size_t s = states.find_first(); s != StateSet::npos;
           s = states.find_next(s)) {
        EvalEnv ee{&space, s, nullptr};
        auto v = evalExpr(head->e1, ee);
        if (!v) continue;  // a faulting state can never witness the premise
        auto j = space.withVar(s, vi, *v);
        if (j) image.set(*j);
      }
      return GroundExec{std::move(image), skipStmt()};
    }
    case ExecRule::Nondet: {
      if (head->kind != StmtKind::NondetAssign)
        return mismatch("a nondet assignment");
      if (!r.nondetValue)
        return RuleError{RuleError::BadCertificate,
                         "nondet rule needs a chosen value", std::nullopt};
      auto vv = evalRuleArg(r.nondetValue, space.decl(), env);
      if (!vv || !vv->isInt())
        return RuleError{RuleError::BadCertificate,
                         "nondet value does not evaluate to an integer",
                         std::nullopt};
      long long v = vv->asInt();
      int vi = space.indexOfVar(head->var);
      const IntRange sr =
          space.decl().vars[static_cast<std::size_t>(vi)].second.intRange();
      if (v < sr.lo || v > sr.hi)
        return RuleError{RuleError::NondetOutOfRange,
                         "chosen value " + std::to_string(v) +
                             " is outside the sort of '" + head->var + "'",
                         std::nullopt};
      StateSet image(space.size());
      for (std::size_t s = states.find_first(); s != StateSet::npos;
           s = states.find_next(s)) {
        EvalEnv ee{&space, s, nullptr};
        auto lo = evalExpr(head->e1, ee), hi = evalExpr(head->e2, ee);
        if (!lo || !hi || !lo->isInt() || !hi->isInt() || v < lo->asInt() ||
            v > hi->asInt())
          return RuleError{RuleError::NondetOutOfRange,
                           "chosen value " + std::to_string(v) +
                               " is outside the nondet range at some state",
                           s};
        image.set(*space.withVar(s, vi, Value(v)));
      }
      return GroundExec{std::move(image), skipStmt()};
    }
    case ExecRule::ChoiceL:
    case ExecRule::ChoiceR: {
      if (head->kind != StmtKind::Choice) return mismatch("a choice");
      return GroundExec{states,
                        r.rule == ExecRule::ChoiceL ? head->s1 : head->s2};
    }
    case ExecRule::Assume: {
      if (head->kind != StmtKind::Test) return mismatch("an assume");
      for (std::size_t s = states.find_first(); s != StateSet::npos;
           s = states.find_next(s)) {
        EvalEnv ee{&space, s, nullptr};
        auto g = evalBool(head->guard, ee);
        if (!g || !*g)
          return RuleError{RuleError::SideConditionFails,
                           "assertion does not imply the assumed guard", s};
      }
      return GroundExec{states, skipStmt()};
    }
    case ExecRule::AssertStep: {
      if (head->kind != StmtKind::Assert) return mismatch("an assert");
      StateSet keep(space.size());
      for (std::size_t s = states.find_first(); s != StateSet::npos;
           s = states.find_next(s)) {
        EvalEnv ee{&space, s, nullptr};
        auto g = evalBool(head->guard, ee);
        if (g && *g) keep.set(s);
      }
      return GroundExec{std::move(keep), skipStmt()};
    }
    case ExecRule::WhileEnd: {
      if (head->kind != StmtKind::While) return mismatch("a while loop");
      for (std::size_t s = states.find_first(); s != StateSet::npos;
           s = states.find_next(s)) {
        EvalEnv ee{&space, s, nullptr};
        auto g = evalBool(head->guard, ee);
        if (!g || *g)
          return RuleError{RuleError::SideConditionFails,
                           "assertion does not refute the loop guard", s};
      }
      return GroundExec{states, skipStmt()};
    }
    case ExecRule::WhileUnroll: {
      if (head->kind != StmtKind::While) return mismatch("a while loop");
      for (std::size_t s = states.find_first(); s != StateSet::npos;
           s = states.find_next(s)) {
        EvalEnv ee{&space, s, nullptr};
        auto g = evalBool(head->guard, ee);
        if (!g || !*g)
          return RuleError{RuleError::SideConditionFails,
                           "assertion does not imply the loop guard", s};
      }
      return GroundExec{states, seqOrSkip(head->s1, head)};
    }
    case ExecRule::Pure: {
      if (!r.pureReplacement)
        return RuleError{RuleError::BadCertificate,
                         "pure rule needs a replacement program", std::nullopt};
      if (r.pureSemantic) {
        for (std::size_t s = states.find_first(); s != StateSet::npos;
             s = states.find_next(s))
          if (!high.configRefines(s, head, s, r.pureReplacement))
            return RuleError{RuleError::SideConditionFails,
                             "replacement is not a per-state refinement of the "
                             "current head",
                             s};
      } else {
        RuleResult sub = applyChain(GroundExec{states, head}, r.nested, high, env);
        if (!ruleOk(sub)) return sub;
        const GroundExec& g = std::get<GroundExec>(sub);
        if (!structEq(g.prog, r.pureReplacement))
          return RuleError{RuleError::BadCertificate,
                           "nested chain does not end at the replacement program",
                           std::nullopt};
        if (!g.states.is_subset_of(states))
          return RuleError{RuleError::BadCertificate,
                           "nested chain weakens the assertion", std::nullopt};
      }
      return GroundExec{states, r.pureReplacement};
    }
    case ExecRule::SeqStep: {
      RuleResult sub = applyChain(GroundExec{states, head}, r.nested, high, env);
      if (!ruleOk(sub)) return sub;
      GroundExec g = std::get<GroundExec>(std::move(sub));
      if (g.prog->kind != StmtKind::Skip)
        return RuleError{RuleError::BadCertificate,
                         "nested chain must consume the first statement",
                         std::nullopt};
      return GroundExec{std::move(g.states), skipStmt()};
    }
    case ExecRule::FocusAngelic: {
      if (!r.focusIntermediate)
        return RuleError{RuleError::BadCertificate,
                         "focus rule needs an intermediate assertion",
                         std::nullopt};
      LogicalEnv e2 = env;
      StateSet target = groundAssert(r.focusIntermediate, space, e2);
      AngelicResult ar = angelicValid(high, states, head, target);
      if (!ar.valid)
        return RuleError{RuleError::SideConditionFails,
                         "no successful run reaches the focus assertion",
                         ar.witness};
      return GroundExec{std::move(target), skipStmt()};
    }
  }
  return RuleError{RuleError::BadCertificate, "unknown rule", std::nullopt};
}

}  // namespace detail

// Applies one rule to the leftmost statement of the predicate's program.
// Sequencing is handled here once: a head consumed to skip continues with
// the rest of the program, a rewritten head is re-sequenced in front of it.
inline RuleResult applyRule(const GroundExec& p, const RuleApp& r,
                            Interp& high, const LogicalEnv& env) {
  auto [head, rest] = splitSeq(p.prog);
  RuleResult res = detail::applyAtHead(p.states, head, r, high, env);
  if (!ruleOk(res)) return res;
  GroundExec g = std::get<GroundExec>(std::move(res));
  g.prog = seqOrSkip(g.prog, rest);
  return g;
}

}  // namespace refine
