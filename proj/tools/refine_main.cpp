// Command-line front end: denotation dumps, triple checking, proof
// checking, assertion encoding, and the property fuzz suites.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "refine/refine.hpp"

namespace fs = std::filesystem;
using namespace refine;

namespace {

struct RunConfig {
  std::size_t cap = 16;  // exhaustive-X cap, in high states
  int jobs = 1;
  bool jsonLines = false;
};

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const RunConfig& rc, const Json& record, const std::string& text) {
  if (rc.jsonLines)
    std::cout << record.dump() << "\n";
  else
    std::cout << text;
}

int cmdSemantics(const std::string& path, const RunConfig& rc) {
  ProgFile f = parseProgFile(readFile(path));
  StateSpace space(f.decl);
  Interp interp(space);
  const Denotation& d = interp.denote(f.body);
  std::ostringstream text;
  Json j;
  j["cmd"] = "semantics";
  Json nrm = Json::array();
  for (std::size_t s = 0; s < space.size(); ++s)
    for (std::size_t s2 = d.nrm[s].find_first(); s2 != StateSet::npos;
         s2 = d.nrm[s].find_next(s2)) {
      text << stateToString(space, s) << " -> " << stateToString(space, s2)
           << "\n";
      nrm.push_back({stateToString(space, s), stateToString(space, s2)});
    }
  text << "err:\n";
  Json err = Json::array();
  for (std::size_t s = d.err.find_first(); s != StateSet::npos;
       s = d.err.find_next(s)) {
    text << "  " << stateToString(space, s) << "\n";
    err.push_back(stateToString(space, s));
  }
  j["nrm"] = nrm;
  j["err"] = err;
  emit(rc, j, text.str());
  return 0;
}

int cmdCheck(const std::string& path, const std::string& mode,
             const RunConfig& rc) {
  TripleFile f = parseTripleFile(readFile(path));
  if (!f.lowProg) throw LoadError("triple file needs a low { ... } block");
  StateSpace lowSpace(f.lowDecl);
  StateSpace highSpace(f.highDecl);
  Interp low(lowSpace), high(highSpace);
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  if (mode == "std") {
    if (!f.std_)
      throw LoadError("mode std needs unary pre/post assertions");
    bool anyExec = containsExec(f.std_->pre) || containsExec(f.std_->post);
    Json j;
    j["cmd"] = "check";
    j["mode"] = "std";
    std::ostringstream text;
    StdVerdict v;
    if (!anyExec) {
      v = stdValidAtX(low, nullptr, *f.std_, nullptr);
      j.update(stdVerdictJson(v, lowSpace));
    } else {
      std::size_t n = highSpace.size();
      bool sampled = n > rc.cap;
      j["quantified_x"] = sampled ? "sampled" : "exhaustive";
      v.valid = true;
      if (!sampled) {
        SweepResult sweep = sweepStdAllX(f.std_->pre, f.std_->stmt,
                                         f.std_->post, low, high, rc.cap);
        v.valid = sweep.valid;
        if (!sweep.valid) {
          StateSet x = subsetFromMask(*sweep.witnessMask, n);
          v = stdValidAtX(low, &high, *f.std_, &x);
          j["witness_x"] = maskString(x);
        }
      } else {
        text << "warning: high space exceeds the cap, sampling X\n";
        std::uint64_t seed = 1;
        for (int k = 0; k < 64 && v.valid; ++k) {
          StateSet x(n);
          for (std::size_t i = 0; i < n; ++i) {
            seed ^= seed << 13; seed ^= seed >> 7; seed ^= seed << 17;
            if (seed & 1) x.set(i);
          }
          v = stdValidAtX(low, &high, *f.std_, &x);
          if (!v.valid) j["witness_x"] = maskString(x);
        }
      }
      j.update(stdVerdictJson(v, lowSpace));
    }
    text << "standard triple: " << (v.valid ? "valid" : "invalid") << "\n";
    if (v.cex) {
      text << "  counterexample: initial " << stateToString(lowSpace, v.cex->initial);
      if (v.cex->final)
        text << " reaches " << stateToString(lowSpace, *v.cex->final);
      else
        text << " may fault";
      text << "\n";
    }
    text << "time: " << elapsed() << " ms\n";
    emit(rc, j, text.str());
    return v.valid ? 0 : 1;
  }

  if (!f.rel)
    throw LoadError("mode " + mode + " needs relational pre/post assertions");
  RelTripleSem sem = semantify(*f.rel, lowSpace, highSpace);

  if (mode == "rel") {
    RelVerdict v = relValid(low, high, sem);
    Json j;
    j["cmd"] = "check";
    j["mode"] = "rel";
    j.update(relVerdictJson(v, lowSpace, highSpace));
    std::ostringstream text;
    text << "relational triple: " << (v.valid ? "valid" : "invalid") << "\n";
    if (v.cex) {
      text << "  counterexample (" << v.cex->reason << "): low "
           << stateToString(lowSpace, v.cex->lowInit) << ", high "
           << stateToString(highSpace, v.cex->highInit) << " with `"
           << printStmt(v.cex->highProg) << "`";
      if (v.cex->lowFinal)
        text << ", low result " << stateToString(lowSpace, *v.cex->lowFinal);
      text << "\n";
    }
    text << "time: " << elapsed() << " ms\n";
    emit(rc, j, text.str());
    return v.valid ? 0 : 1;
  }

  if (mode == "encode-equiv") {
    EncodeEquivReport rep = checkEncodingEquiv(low, high, sem, rc.cap, rc.jobs);
    Json j;
    j["cmd"] = "check";
    j["mode"] = "encode-equiv";
    j["relational"] = rep.relational.valid ? "valid" : "invalid";
    j["encoded_all_x"] = rep.encodedAllX ? "valid" : "invalid";
    j["agree"] = rep.agree;
    j["exhaustive"] = rep.exhaustive;
    j["x_checked"] = rep.xChecked;
    if (rep.witnessX) j["witness_x"] = maskString(*rep.witnessX);
    std::ostringstream text;
    text << "relational:  " << (rep.relational.valid ? "valid" : "invalid")
         << "\n";
    text << "encoded (" << (rep.exhaustive ? "exhaustive" : "sampled")
         << " X, " << rep.xChecked << " sets): "
         << (rep.encodedAllX ? "valid" : "invalid") << "\n";
    if (!rep.exhaustive)
      text << "warning: high space exceeds the cap; checked sampled X plus "
              "canonical witnesses\n";
    if (rep.witnessX) {
      text << "  witness X = {";
      bool first = true;
      for (std::size_t s = rep.witnessX->find_first(); s != StateSet::npos;
           s = rep.witnessX->find_next(s)) {
        if (!first) text << ", ";
        text << stateToString(highSpace, s);
        first = false;
      }
      text << "}\n";
    }
    if (rep.relational.cex) {
      const auto& c = *rep.relational.cex;
      text << "  relational counterexample (" << c.reason << "): low "
           << stateToString(lowSpace, c.lowInit) << ", high "
           << stateToString(highSpace, c.highInit);
      if (c.lowFinal)
        text << ", low result " << stateToString(lowSpace, *c.lowFinal);
      text << "\n";
    }
    text << "agreement:   " << (rep.agree ? "true" : "false") << "\n";
    text << "time: " << elapsed() << " ms\n";
    emit(rc, j, text.str());
    if (!rep.agree) return 3;
    return rep.relational.valid ? 0 : 1;
  }
  throw LoadError("unknown check mode '" + mode + "'");
}

int cmdProve(const std::string& path, bool oracle, const RunConfig& rc) {
  ProofFile f = parseProofFile(readFile(path));
  ProofChecker checker(f, rc.cap);
  auto t0 = std::chrono::steady_clock::now();
  ProofReport rep = checker.run(oracle);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  std::ostringstream text;
  for (const auto& o : rep.obligations) {
    text << (o.ok ? "  ok   " : "  FAIL ") << "#" << o.id << " " << o.desc
         << "\n";
    if (!o.ok) text << "       " << o.message << "\n";
  }
  switch (rep.outcome) {
    case ProofReport::Certified: text << "certified"; break;
    case ProofReport::ObligationFailed: text << "obligation failure"; break;
    case ProofReport::StructuralError:
      text << "structural error: " << rep.structuralError;
      break;
    case ProofReport::OracleDisagreement:
      text << "ORACLE DISAGREEMENT (internal soundness alarm)";
      break;
  }
  text << "\n";
  if (!rep.oracleNote.empty()) text << rep.oracleNote << "\n";
  text << "time: " << ms << " ms\n";
  emit(rc, toJson(rep), text.str());
  return rep.exitCode();
}

int cmdEncode(const std::string& path, const RunConfig& rc) {
  TripleFile f = parseTripleFile(readFile(path));
  if (!f.rel) throw LoadError("encode needs a relational triple file");
  Json j;
  j["cmd"] = "encode";
  j["pre"] = printAssert(encodeSyntactic(f.rel->pre));
  j["post"] = printAssert(encodeSyntactic(f.rel->post));
  std::ostringstream text;
  text << "pre:  " << printAssert(encodeSyntactic(f.rel->pre)) << "\n";
  text << "post: " << printAssert(encodeSyntactic(f.rel->post)) << "\n";
  emit(rc, j, text.str());
  return 0;
}

int cmdFuzz(const std::string& property, std::uint64_t seed, int count,
            int depth, bool injectBug, const std::string& saveDir,
            const RunConfig& rc) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.maxDepth = depth;
  cfg.maxStates = 12;
  std::vector<std::pair<std::string, std::string>> saved;
  FailureSaver saver = [&](const std::string& name, const std::string& body) {
    saved.emplace_back(name, body);
  };
  PropertyOutcome out;
  if (property == "thm4")
    out = runThm4(cfg, count, injectBug, saver);
  else if (property == "decomp")
    out = runDecomp(cfg, count);
  else if (property == "exec-rules")
    out = runExecRules(cfg, count);
  else if (property == "vc")
    out = runVc(cfg, count);
  else if (property == "enc")
    out = runEncTransforms(cfg, count);
  else
    throw LoadError("unknown property '" + property + "'");
  if (out.failed > 0) {
    // every failure gets a replayable artifact: triple files where the
    // instance is a triple, otherwise the exact reproduction run
    std::ostringstream repro;
    repro << "refine fuzz --property " << property << " --seed " << seed
          << " --count " << count << " --depth " << depth << "\n";
    for (const auto& fmsg : out.failures) repro << fmsg << "\n";
    saver(property + "-repro.txt", repro.str());
  }
  Json j = toJson(out);
  std::ostringstream text;
  text << out.property << ": " << out.passed << "/" << out.count
       << " passed, " << out.failed << " failed (seed " << out.seed << ")\n";
  for (const auto& fmsg : out.failures) text << "  " << fmsg << "\n";
  if (!saved.empty()) {
    fs::create_directories(saveDir);
    Json files = Json::array();
    for (auto& [name, body] : saved) {
      fs::path p = fs::path(saveDir) / name;
      std::ofstream of(p);
      of << body;
      text << "  counterexample saved to " << p.string() << "\n";
      files.push_back(p.string());
    }
    j["saved"] = files;
  }
  emit(rc, j, text.str());
  return out.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-domain refinement checker"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  RunConfig rc;
  if (const char* env = std::getenv("REFINE_ENC_X_CAP"))
    rc.cap = static_cast<std::size_t>(std::strtoull(env, nullptr, 10));
  std::string format = "text";
  app.add_option("--format", format, "output format: text or json-lines")
      ->check(CLI::IsMember({"text", "json-lines"}));
  app.add_option("--cap", rc.cap,
                 "exhaustive-X cap in high-level states (default 16, env "
                 "REFINE_ENC_X_CAP)");
  app.add_option("--jobs", rc.jobs, "worker threads for the X sweep");

  std::string file, mode = "rel", property = "thm4", saveDir = "fuzz-failures";
  bool oracle = false, injectBug = false;
  std::uint64_t seed = 0;
  int count = 100, depth = 3;

  CLI::App* semantics =
      app.add_subcommand("semantics", "dump a program's denotation");
  semantics->add_option("file", file)->required();

  CLI::App* check = app.add_subcommand("check", "check a triple file");
  check->add_option("file", file)->required();
  check->add_option("--mode", mode, "std, rel or encode-equiv")
      ->check(CLI::IsMember({"std", "rel", "encode-equiv"}));

  CLI::App* prove = app.add_subcommand("prove", "check a proof script");
  prove->add_option("file", file)->required();
  prove->add_flag("--oracle", oracle, "cross-check against the semantic oracle");

  CLI::App* encode =
      app.add_subcommand("encode", "print the syntactic encoding of a "
                                   "relational triple's assertions");
  encode->add_option("file", file)->required();

  CLI::App* fuzz = app.add_subcommand("fuzz", "run a property suite");
  fuzz->add_option("--property", property,
                   "thm4, decomp, exec-rules, vc or enc")
      ->check(CLI::IsMember({"thm4", "decomp", "exec-rules", "vc", "enc"}));
  fuzz->add_option("--seed", seed);
  fuzz->add_option("--count", count);
  fuzz->add_option("--depth", depth);
  fuzz->add_flag("--inject-bug", injectBug,
                 "fault injection: desync the encoded side (testing only)");
  fuzz->add_option("--save-dir", saveDir, "directory for counterexample files");

  CLI11_PARSE(app, argc, argv);
  rc.jsonLines = (format == "json-lines");

  try {
    if (semantics->parsed()) return cmdSemantics(file, rc);
    if (check->parsed()) return cmdCheck(file, mode, rc);
    if (prove->parsed()) return cmdProve(file, oracle, rc);
    if (encode->parsed()) return cmdEncode(file, rc);
    if (fuzz->parsed())
      return cmdFuzz(property, seed, count, depth, injectBug, saveDir, rc);
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
