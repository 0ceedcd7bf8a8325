#pragma once

#include <string>
#include <vector>

#include "refine/parser.hpp"

namespace refine {

// ---------------------------------------------------------------------------
// Obligations. Each one is self-contained: the assertion at the last
// annotation point, the low-level steps applied since (the statement trail),
// and what must hold. Exec atoms flow through statement steps untouched;
// the trail records where they are framed across low-level commands.
// ---------------------------------------------------------------------------

struct TrailStep {
  enum Kind { Statement, Guard } kind = Statement;
  StmtRef stmt;
  BoolRef guard;
  bool negated = false;
};

struct Obligation {
  enum Kind { Entailment, SubTriple, SideCondition } kind = Entailment;
  int id = 0;
  std::string desc;
  SourcePos pos;
  std::size_t rigidCount = 0;  // script binders in scope
  AssertRef base;
  std::vector<TrailStep> trail;
  std::vector<RuleApp> chain;  // Entailment: carried exec rule chain
  AssertRef target;            // Entailment
  StmtRef stmt;                // SubTriple: the low statement stepped over
  BoolRef guard;               // SideCondition: loop guard must evaluate
};

struct ObligationResult {
  int id = 0;
  std::string desc;
  bool ok = true;
  std::string message;
};

struct ProofReport {
  enum Outcome { Certified, ObligationFailed, StructuralError, OracleDisagreement };
  Outcome outcome = Certified;
  std::vector<ObligationResult> obligations;
  std::string structuralError;
  std::string oracleNote;

  int exitCode() const {
    switch (outcome) {
      case Certified: return 0;
      case ObligationFailed: return 1;
      case StructuralError: return 2;
      case OracleDisagreement: return 3;
    }
    return 2;
  }
};

// ---------------------------------------------------------------------------
// Proof checking: compile the annotated program to obligations, discharge
// each one, and optionally cross-check the certified goal against the
// brute-force semantic oracle. X is never materialized while discharging;
// only the oracle enumerates it.
// ---------------------------------------------------------------------------

class ProofChecker {
public:
  ProofChecker(const ProofFile& f, std::size_t capStates = 16)
      : file_(f),
        lowSpace_(f.lowDecl),
        highSpace_(f.highDecl),
        low_(lowSpace_),
        high_(highSpace_),
        cap_(capStates) {}

  ProofReport run(bool withOracle) {
    ProofReport rep;
    try {
      compile();
    } catch (const LoadError& e) {
      rep.outcome = ProofReport::StructuralError;
      rep.structuralError = e.what();
      return rep;
    }
    bool allOk = true;
    for (const Obligation& ob : obligations_) {
      ObligationResult r;
      try {
        r = discharge(ob);
      } catch (const LoadError& e) {
        rep.outcome = ProofReport::StructuralError;
        rep.structuralError = e.what();
        return rep;
      }
      allOk = allOk && r.ok;
      rep.obligations.push_back(std::move(r));
    }
    rep.outcome = allOk ? ProofReport::Certified : ProofReport::ObligationFailed;
    if (allOk && withOracle) {
      bool disagree = false;
      rep.oracleNote = runOracle(disagree);
      if (disagree) rep.outcome = ProofReport::OracleDisagreement;
    }
    return rep;
  }

  const std::vector<Obligation>& obligations() const { return obligations_; }
  Interp& lowInterp() { return low_; }
  Interp& highInterp() { return high_; }

  // Obligations are self-contained; each can be discharged on its own.
  ObligationResult discharge(const Obligation& ob) { return dischargeImpl(ob); }

private:
  struct WalkState {
    AssertRef base;
    std::vector<TrailStep> trail;
    std::vector<RuleApp> chain;
  };

  void compile() {
    WalkState st{file_.pre, {}, {}};
    compileItems(file_.items, std::move(st), file_.post, "postcondition", true);
  }

  void emitEntailment(WalkState& st, const AssertRef& target,
                      const std::string& desc, SourcePos pos) {
    Obligation ob;
    ob.kind = Obligation::Entailment;
    ob.id = static_cast<int>(obligations_.size()) + 1;
    ob.desc = desc;
    ob.pos = pos;
    ob.rigidCount = rigid_.size();
    ob.base = st.base;
    ob.trail = st.trail;
    ob.chain = st.chain;
    ob.target = target;
    obligations_.push_back(std::move(ob));
  }

  void compileItems(const std::vector<ProofItem>& items, WalkState st,
                    const AssertRef& target, const char* targetDesc,
                    bool topLevel) {
    const AssertRef* pendingInvariant = nullptr;
    SourcePos invariantPos;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const ProofItem& it = items[i];
      if (pendingInvariant && it.kind != ProofItem::WhileBlock)
        throw LoadError("@invariant must be followed by a while loop", it.pos);
      switch (it.kind) {
        case ProofItem::ExecStep:
          st.chain.push_back(it.rule);
          break;
        case ProofItem::AssertStep: {
          checkAssertion(it.assertion, file_.lowDecl, &file_.highDecl, rigid_);
          emitEntailment(st, it.assertion,
                         "consequence at line " + std::to_string(it.pos.line),
                         it.pos);
          st = WalkState{it.assertion, {}, {}};
          break;
        }
        case ProofItem::ExIntroStep: {
          if (!topLevel)
            throw LoadError("@exintro is only allowed at the top level", it.pos);
          if (!st.chain.empty() || !st.trail.empty())
            throw LoadError("@exintro needs a fresh annotation point", it.pos);
          if (st.base->kind != AsrtKind::Exists || st.base->binderName != it.name)
            throw LoadError("@exintro " + it.name +
                                ": current assertion does not start with "
                                "exists " + it.name,
                            it.pos);
          rigid_.emplace_back(st.base->binderName, st.base->binderSort);
          st.base = st.base->a1;
          break;
        }
        case ProofItem::Statement: {
          if (!st.chain.empty())
            throw LoadError(
                "pending @exec directives must be closed by an @assert "
                "before a statement",
                it.pos);
          if (it.stmt->kind == StmtKind::Skip) break;
          Obligation ob;
          ob.kind = Obligation::SubTriple;
          ob.id = static_cast<int>(obligations_.size()) + 1;
          ob.desc = "statement `" + printStmt(it.stmt) + "` at line " +
                    std::to_string(it.pos.line);
          // document where Exec atoms are carried across low-level steps
          if (containsExec(st.base)) ob.desc += " (Exec atoms framed)";
          ob.pos = it.pos;
          ob.rigidCount = rigid_.size();
          ob.base = st.base;
          ob.trail = st.trail;
          ob.stmt = it.stmt;
          obligations_.push_back(std::move(ob));
          st.trail.push_back(TrailStep{TrailStep::Statement, it.stmt, nullptr, false});
          break;
        }
        case ProofItem::InvariantStep: {
          checkAssertion(it.assertion, file_.lowDecl, &file_.highDecl, rigid_);
          pendingInvariant = &it.assertion;
          invariantPos = it.pos;
          break;
        }
        case ProofItem::WhileBlock: {
          if (!pendingInvariant)
            throw LoadError("while loop needs a preceding @invariant", it.pos);
          AssertRef inv = *pendingInvariant;
          pendingInvariant = nullptr;
          emitEntailment(st, inv,
                         "loop entry entails invariant (line " +
                             std::to_string(it.pos.line) + ")",
                         it.pos);
          Obligation gob;
          gob.kind = Obligation::SideCondition;
          gob.id = static_cast<int>(obligations_.size()) + 1;
          gob.desc = "loop guard evaluates under the invariant (line " +
                     std::to_string(it.pos.line) + ")";
          gob.pos = it.pos;
          gob.rigidCount = rigid_.size();
          gob.base = inv;
          gob.guard = it.guard;
          obligations_.push_back(std::move(gob));
          WalkState body{inv, {TrailStep{TrailStep::Guard, nullptr, it.guard, false}}, {}};
          compileItems(it.body, std::move(body), inv,
                       "loop invariant preservation", false);
          st = WalkState{inv, {TrailStep{TrailStep::Guard, nullptr, it.guard, true}}, {}};
          break;
        }
        case ProofItem::ChoiceBlock: {
          if (!st.chain.empty())
            throw LoadError("close pending @exec directives before a choice",
                            it.pos);
          if (i + 1 >= items.size() || items[i + 1].kind != ProofItem::AssertStep)
            throw LoadError("choice block must be followed by an @assert join",
                            it.pos);
          const AssertRef& join = items[i + 1].assertion;
          checkAssertion(join, file_.lowDecl, &file_.highDecl, rigid_);
          compileItems(it.body, st, join, "left choice branch", false);
          compileItems(it.body2, st, join, "right choice branch", false);
          st = WalkState{join, {}, {}};
          ++i;  // the join annotation is consumed
          break;
        }
      }
    }
    if (pendingInvariant)
      throw LoadError("@invariant not followed by a while loop", invariantPos);
    SourcePos endPos = items.empty() ? SourcePos{} : items.back().pos;
    emitEntailment(st, target, std::string(targetDesc), endPos);
  }

  NormalForm groundAt(const Obligation& ob, const LogicalEnv& env) {
    NormalForm nf = normalize(ob.base, lowSpace_, &highSpace_, env);
    for (const TrailStep& step : ob.trail) {
      if (step.kind == TrailStep::Guard) {
        GuardSets gs = evalGuard(step.guard, lowSpace_);
        const StateSet& keep = step.negated ? gs.no : gs.yes;
        for (auto& d : nf.disjuncts)
          for (auto& lo : d.low) lo &= keep;
      } else {
        const Denotation& den = low_.denote(step.stmt);
        for (auto& d : nf.disjuncts)
          for (auto& lo : d.low) lo = imageSet(den, lo);
      }
    }
    return nf;
  }

  ObligationResult dischargeImpl(const Obligation& ob) {
    ObligationResult res;
    res.id = ob.id;
    res.desc = ob.desc;
    std::vector<std::pair<std::string, Sort>> rigidPrefix(
        rigid_.begin(), rigid_.begin() + static_cast<long>(ob.rigidCount));
    BinderIter it(rigidPrefix);
    for (std::uint64_t rank = 0; rank < it.count(); ++rank) {
      LogicalEnv env = it.envAt(rank);
      NormalForm nf = groundAt(ob, env);
      switch (ob.kind) {
        case Obligation::SubTriple: {
          const Denotation& den = low_.denote(ob.stmt);
          for (auto& d : nf.disjuncts) {
            BinderIter bi(d.binders);
            for (std::uint64_t v = 0; v < bi.count(); ++v) {
              StateSet bad = d.low[v] & den.err;
              if (bad.any()) {
                LogicalEnv full = env;
                for (auto& b : bi.envAt(v)) full.push_back(b);
                res.ok = false;
                res.message = "statement may fault from " +
                              stateToString(lowSpace_, bad.find_first()) +
                              detail::describeEnv(full);
                return res;
              }
            }
          }
          break;
        }
        case Obligation::SideCondition: {
          GuardSets gs = evalGuard(ob.guard, lowSpace_);
          for (auto& d : nf.disjuncts)
            for (auto& lo : d.low) {
              StateSet bad = lo & gs.fault;
              if (bad.any()) {
                res.ok = false;
                res.message = "guard faults at " +
                              stateToString(lowSpace_, bad.find_first());
                return res;
              }
            }
          break;
        }
        case Obligation::Entailment: {
          NormalForm tnf = normalize(ob.target, lowSpace_, &highSpace_, env);
          EntailResult er =
              entailsStructural(nf, tnf, ob.chain, low_, &high_, env);
          if (!er.ok) {
            res.ok = false;
            res.message = er.message;
            return res;
          }
          break;
        }
      }
    }
    return res;
  }

  // Decode the Exec-bearing goal back into a decomposed relational triple.
  std::optional<RelTriple> decodeGoal() {
    auto decode = [&](const AssertRef& a) -> std::optional<DecomposedRel> {
      std::vector<detail::RawDisjunct> raw;
      detail::flattenAssert(a, raw);
      DecomposedRel rel;
      for (auto& rd : raw) {
        if (!rd.execProg) return std::nullopt;
        RelDisjunct d;
        d.binders = rd.binders;
        d.pure = boolLit(true);
        for (auto& c : rd.lowConjs) d.low = d.low ? andAssert(d.low, c) : c;
        if (!d.low) d.low = trueAssert();
        d.high = rd.execHigh;
        d.prog = rd.execProg;
        rel.disjuncts.push_back(std::move(d));
      }
      return rel;
    };
    auto pre = decode(file_.pre);
    auto post = decode(file_.post);
    if (!pre || !post) return std::nullopt;
    return RelTriple{std::move(*pre), std::move(*post), file_.lowProg};
  }

  std::string runOracle(bool& disagree) {
    disagree = false;
    bool anyExec = containsExec(file_.pre) || containsExec(file_.post);
    if (!anyExec) {
      StdTriple t{file_.pre, file_.lowProg, file_.post};
      StdVerdict v = stdValidAtX(low_, nullptr, t, nullptr);
      if (!v.valid) {
        disagree = true;
        return "oracle: certified goal is INVALID (standard semantics)";
      }
      return "oracle: standard validity confirmed";
    }
    std::string note;
    auto rel = decodeGoal();
    if (rel) {
      RelTripleSem sem = semantify(*rel, lowSpace_, highSpace_);
      RelVerdict v = relValid(low_, high_, sem);
      if (!v.valid) {
        disagree = true;
        return "oracle: certified goal is INVALID relationally (" +
               (v.cex ? v.cex->reason : std::string()) + ")";
      }
      note = "oracle: relational validity confirmed";
    } else {
      note = "oracle: goal not in decomposed form, relational check skipped";
    }
    if (highSpace_.size() <= cap_) {
      SweepResult sweep =
          sweepStdAllX(file_.pre, file_.lowProg, file_.post, low_, high_, cap_);
      if (!sweep.valid) {
        disagree = true;
        return "oracle: encoded triple fails at X mask " +
               std::to_string(*sweep.witnessMask);
      }
      note += "; exhaustive X sweep confirmed";
    }
    return note;
  }

  const ProofFile& file_;
  StateSpace lowSpace_, highSpace_;
  Interp low_, high_;
  std::size_t cap_;
  std::vector<std::pair<std::string, Sort>> rigid_;
  std::vector<Obligation> obligations_;
};

}  // namespace refine
