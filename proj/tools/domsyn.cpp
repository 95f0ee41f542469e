#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "domsyn/io.hpp"
#include "domsyn/search.hpp"
#include "domsyn/specfile.hpp"

using namespace domsyn;
using json = io::json;

namespace {

enum Exit { kPositive = 0, kNegative = 1, kError = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// FNV-1a, printed as 16 hex digits.
std::string digest(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',' || c == ' ' || c == '>') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep = ",") {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : sep) + x;
  return out;
}

struct Options {
  std::string path;
  bool json = false;
  std::string output;
};

struct Run {
  const Options& opt;
  std::string command;
  SpecFile file;
  std::string source;
  json report;
  std::ostringstream text;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Run(const Options& o, std::string cmd) : opt(o), command(std::move(cmd)) {
    source = read_file(opt.path);
    report = {{"format", io::kFormat}, {"command", command}, {"input", {{"path", opt.path}, {"digest", digest(source)}}}};
  }

  const Universe& u() const { return file.universe(); }

  int finish(int code) {
    if (opt.json) {
      auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      report["wall_ms"] = static_cast<std::int64_t>(ms);
      std::cout << report.dump(2) << "\n";
    } else {
      std::cout << text.str();
    }
    return code;
  }
};

void write_artifact(const Options& opt, const json& j) {
  if (opt.output.empty()) return;
  std::ofstream out(opt.output);
  if (!out) throw UsageError("cannot write '" + opt.output + "'");
  out << j.dump(2) << "\n";
}

// A [strategy] section that parse_spec accepts back.
std::string strategy_section(const Universe& u, const OneHot& one_hot, const std::string& name,
                             const std::vector<std::string>& procs, const Transducer& t) {
  std::ostringstream s;
  s << "[strategy " << name << "]\nprocess " << join(procs, " ") << "\n";
  std::vector<int> order{t.initial};
  for (int q = 0; q < t.size(); ++q) {
    if (q != t.initial) order.push_back(q);
  }
  for (int q : order) s << "state " << t.state_name(q) << " " << u.format(t.output[q]) << "\n";
  for (int q : order) {
    for (Valuation x : one_hot.letters(t.inputs)) {
      std::string cond;
      for (int i = 0; i < u.size(); ++i) {
        if (!(t.inputs & bit(i))) continue;
        cond += (cond.empty() ? "" : ", ") + std::string(x & bit(i) ? "" : "!") + u.name(i);
      }
      s << "next " << t.state_name(q) << " " << (cond.empty() ? "*" : cond) << " -> " << t.state_name(t.step(q, x))
        << "\n";
    }
  }
  return s.str();
}

json strategy_artifact(const Run& r, const std::vector<std::string>& procs, const Transducer& t) {
  json j = io::transducer(r.u(), t, r.file.arch.one_hot);
  j["processes"] = procs;
  return j;
}

std::vector<std::string> processes_of(const json& j) {
  if (!j.contains("processes")) throw io::FormatError("strategy file lacks 'processes'");
  return j.at("processes").get<std::vector<std::string>>();
}

// ---- parse

int cmd_parse(const Options& opt) {
  Run r(opt, "parse");
  r.file = parse_spec(r.source);
  const auto& f = r.file;
  json procs = json::object();
  std::size_t objectives = 0;
  for (const auto& [name, p] : f.arch.processes) {
    std::size_t n = f.objectives.count(name) ? f.objectives.at(name).size() : 0;
    objectives += n;
    procs[name] = {{"inputs", io::vars(r.u(), p.inputs)}, {"outputs", io::vars(r.u(), p.outputs)}, {"objectives", n}};
  }
  json strategies = json::array(), assumptions = json::array();
  for (const auto& [name, _] : f.strategies) strategies.push_back(name);
  for (const auto& [name, _] : f.assumptions) assumptions.push_back(name);
  r.report["ok"] = true;
  r.report["variables"] = r.u().size();
  r.report["processes"] = procs;
  r.report["objectives"] = objectives;
  r.report["world_model"] = f.world.has_value();
  r.report["strategies"] = strategies;
  r.report["assumptions"] = assumptions;
  r.report["order"] = f.order;

  r.text << "ok: " << f.arch.processes.size() << " processes, " << objectives << " objectives, " << r.u().size()
         << " variables\n";
  for (const auto& [name, p] : f.arch.processes) {
    r.text << "  process " << name << ": inputs " << r.u().format(p.inputs) << " outputs " << r.u().format(p.outputs)
           << "\n";
    if (!f.objectives.count(name)) continue;
    const auto& objs = f.objectives.at(name).objectives;
    for (std::size_t k = 0; k < objs.size(); ++k) r.text << "    " << k + 1 << ". " << to_string(r.u(), objs[k]) << "\n";
  }
  if (f.world) r.text << "  world model with " << f.plant->size() << " states\n";
  if (!f.strategies.empty()) r.text << "  strategies: " << join(strategies.get<std::vector<std::string>>(), ", ") << "\n";
  if (!f.assumptions.empty()) r.text << "  assumptions: " << join(assumptions.get<std::vector<std::string>>(), ", ") << "\n";
  if (!f.order.empty()) r.text << "  order: " << join(f.order, " > ") << "\n";
  return r.finish(kPositive);
}

// ---- check

struct CheckOptions {
  std::string strategy, strategy_file, assumption, assumption_file, mode = "dominant";
};

void describe_counterexample(Run& r, const Counterexample& c) {
  r.text << "  environment: " << format_lasso(r.u(), c.gamma.canonical()) << "\n"
         << "  outputs:     " << format_lasso(r.u(), c.outputs.canonical()) << " (priority " << c.k << ")\n"
         << "  better:      " << format_lasso(r.u(), c.better.canonical()) << " (priority " << c.m << ")\n";
}

int check_assumption(Run& r, const std::string& label, const AnnotatedGenerator& ag, const std::string& process) {
  if (ag.annotation.empty()) throw UsageError("assumption '" + label + "' has no annotation");
  auto v = check_annotation_dominant(r.file.spec_for({process}), ag, r.file.arena_for({process}));
  r.report["assumption"] = label;
  r.report["process"] = process;
  r.report["mode"] = "annotation";
  r.report["verdict"] = io::dominance(r.u(), v);
  r.text << "assumption " << label << " for " << process << ": annotation "
         << (v.dominant ? "is dominant" : "is not dominant") << "\n";
  if (v.counterexample) describe_counterexample(r, *v.counterexample);
  return v.dominant ? kPositive : kNegative;
}

int cmd_check(const Options& opt, const CheckOptions& c) {
  Run r(opt, "check");
  r.file = parse_spec(r.source);
  const int given = !c.strategy.empty() + !c.strategy_file.empty() + !c.assumption.empty() + !c.assumption_file.empty();
  if (given != 1) throw UsageError("give exactly one of --strategy, --strategy-file, --assumption, --assumption-file");

  if (!c.assumption.empty()) {
    auto it = r.file.assumptions.find(c.assumption);
    if (it == r.file.assumptions.end()) throw UsageError("unknown assumption '" + c.assumption + "'");
    return r.finish(check_assumption(r, c.assumption, it->second.generator, it->second.process));
  }
  if (!c.assumption_file.empty()) {
    auto j = json::parse(read_file(c.assumption_file));
    if (!j.contains("process")) throw io::FormatError("assumption file lacks 'process'");
    auto ag = io::generator_from(r.u(), j);
    return r.finish(check_assumption(r, c.assumption_file, ag, j.at("process").get<std::string>()));
  }

  std::vector<std::string> procs;
  Transducer t;
  std::string label;
  if (!c.strategy.empty()) {
    auto it = r.file.strategies.find(c.strategy);
    if (it == r.file.strategies.end()) throw UsageError("unknown strategy '" + c.strategy + "'");
    procs = it->second.processes;
    t = it->second.transducer;
    label = c.strategy;
  } else {
    auto j = json::parse(read_file(c.strategy_file));
    procs = processes_of(j);
    t = io::transducer_from(r.u(), j);
    label = c.strategy_file;
    if (t.outputs != r.file.outputs_of(procs) || (t.inputs & ~r.file.inputs_of(procs))) {
      throw io::FormatError("strategy interface does not match processes " + join(procs));
    }
  }
  const auto spec = r.file.spec_for(procs);
  const auto arena = r.file.arena_for(procs);
  r.report["strategy"] = label;
  r.report["processes"] = procs;
  r.report["mode"] = c.mode;
  const std::string who = "strategy " + label + " for " + join(procs);
  if (c.mode == "winning") {
    auto v = check_winning(spec.objectives[0], t, arena);
    r.report["verdict"] = io::winning(r.u(), v);
    r.text << who << (v.winning ? " is winning\n" : " is not winning\n");
    if (v.gamma) r.text << "  environment: " << format_lasso(r.u(), *v.gamma) << "\n";
    return r.finish(v.winning ? kPositive : kNegative);
  }
  auto v = check_dominant(spec, t, arena);
  r.report["verdict"] = io::dominance(r.u(), v);
  r.text << who << (v.dominant ? " is dominant\n" : " is not dominant\n");
  if (v.counterexample) describe_counterexample(r, *v.counterexample);
  return r.finish(v.dominant ? kPositive : kNegative);
}

// ---- synthesize

struct SynthOptions {
  std::string processes, mode = "dominant", name = "synthesized";
  int bound = 3;
};

int cmd_synthesize(const Options& opt, const SynthOptions& c) {
  Run r(opt, "synthesize");
  r.file = parse_spec(r.source);
  auto procs = split_list(c.processes);
  if (procs.empty()) throw UsageError("--process needs at least one process");
  const auto spec = r.file.spec_for(procs);
  const auto arena = r.file.arena_for(procs);
  const VarSet inputs = r.file.inputs_of(procs);
  auto result = c.mode == "winning" ? synthesize_winning_bounded(spec.objectives[0], arena, inputs, c.bound)
                                    : synthesize_dominant_bounded(spec, arena, inputs, c.bound);
  r.report["processes"] = procs;
  r.report["mode"] = c.mode;
  r.report["bound"] = c.bound;
  r.report["found"] = result.found();
  const std::string what = c.mode == "winning" ? "winning" : "dominant";
  if (!result.found()) {
    const std::string caveat = "no " + what + " strategy with at most " + std::to_string(c.bound) +
                               " states; larger strategies are not excluded, so this does not prove that none exists";
    r.report["caveat"] = caveat;
    r.text << caveat << "\n";
    return r.finish(kNegative);
  }
  const auto& t = *result.transducer;
  json artifact = strategy_artifact(r, procs, t);
  r.report["strategy"] = artifact;
  write_artifact(opt, artifact);
  r.text << "found a " << what << " strategy with " << t.size() << " state" << (t.size() == 1 ? "" : "s") << "\n\n"
         << strategy_section(r.u(), r.file.arch.one_hot, c.name, procs, t);
  return r.finish(kPositive);
}

// ---- assume

struct AssumeOptions {
  std::string process;
  int bound = 4;
  std::size_t limit = 5;
};

std::string generator_line(const AnnotatedGenerator& ag, const OneHot& one_hot) {
  const auto& g = ag.generator;
  return g.name + " (" + std::to_string(g.size()) + " branch node" + (g.size() == 1 ? "" : "s") +
         (is_universal(g, one_hot) ? ", universal" : "") + ")";
}

int cmd_assume(const Options& opt, const AssumeOptions& c) {
  Run r(opt, "assume");
  r.file = parse_spec(r.source);
  r.file.arch.process(c.process);
  auto found = search_assumption_bounded(r.file.spec_for({c.process}), r.file.arena_for({c.process}), c.bound);
  r.report["process"] = c.process;
  r.report["bound"] = c.bound;
  r.report["found"] = found.size();
  json list = json::array();
  for (std::size_t i = 0; i < found.size() && i < c.limit; ++i) {
    json j = io::generator(r.u(), found[i]);
    j["process"] = c.process;
    j["universal"] = is_universal(found[i].generator, r.file.arch.one_hot);
    list.push_back(j);
  }
  r.report["generators"] = list;
  if (!list.empty()) write_artifact(opt, list.front());
  if (found.empty()) {
    const std::string caveat = "no dominant annotated assumption with at most " + std::to_string(c.bound) +
                               " branch nodes; this does not prove that none exists";
    r.report["caveat"] = caveat;
    r.text << caveat << "\n";
    return r.finish(kNegative);
  }
  r.text << found.size() << " dominant annotated assumption" << (found.size() == 1 ? "" : "s") << " for " << c.process
         << ", most permissive first:\n";
  for (std::size_t i = 0; i < found.size() && i < c.limit; ++i) {
    r.text << "  " << i + 1 << ". " << generator_line(found[i], r.file.arch.one_hot) << "\n";
  }
  if (found.size() > c.limit) r.text << "  ... " << found.size() - c.limit << " more\n";
  return r.finish(kPositive);
}

// ---- propagate

struct PropagateOptions {
  std::string order;
  int bound = 8;
};

int cmd_propagate(const Options& opt, const PropagateOptions& c) {
  Run r(opt, "propagate");
  r.file = parse_spec(r.source);
  const auto& f = r.file;
  std::vector<std::string> order = c.order.empty() ? f.order : split_list(c.order);
  if (order.empty()) {
    for (const auto& [name, _] : f.arch.processes) order.push_back(name);
  }
  if (std::set<std::string>(order.begin(), order.end()).size() != order.size() ||
      order.size() != f.arch.processes.size()) {
    throw UsageError("the order must list every process exactly once");
  }
  std::vector<ProcessProblem> problems;
  for (const auto& p : order) problems.push_back({p, f.spec_for({p}), f.arena_for({p})});
  auto result = propagate(problems, f.arch.external_inputs(), f.arch.one_hot, c.bound);

  r.report["order"] = order;
  r.report["bound"] = c.bound;
  r.report["success"] = result.success;
  json procs = json::array();
  for (std::size_t j = 0; j < order.size(); ++j) {
    json p = {{"process", order[j]}};
    if (j < result.candidates.size()) p["candidates"] = result.candidates[j];
    if (j < result.chosen.size()) p["assumption"] = io::generator(r.u(), result.chosen[j]);
    if (result.strategies.count(order[j])) p["strategy"] = strategy_artifact(r, {order[j]}, result.strategies.at(order[j]));
    procs.push_back(p);
  }
  r.report["processes"] = procs;
  if (!result.success) {
    r.report["failure"] = result.failure;
    r.text << "propagation failed: " << result.failure << "\n";
    return r.finish(kNegative);
  }
  r.report["residual_universal"] = true;
  r.report["joint"] = strategy_artifact(r, order, *result.joint);
  write_artifact(opt, r.report["joint"]);

  r.text << "propagation succeeded for " << join(order, " > ") << "\n";
  for (std::size_t j = 0; j < order.size(); ++j) {
    r.text << "  " << order[j] << ": " << generator_line(result.chosen[j], f.arch.one_hot) << ", chosen from "
           << result.candidates[j] << " candidate" << (result.candidates[j] == 1 ? "" : "s") << "\n";
  }
  r.text << "  the last assumption is universal; joint strategy has " << result.joint->size() << " states\n";
  for (const auto& p : order) {
    r.text << "\n" << strategy_section(r.u(), f.arch.one_hot, p + "_extracted", {p}, result.strategies.at(p));
  }
  return r.finish(kPositive);
}

// ---- simulate

struct SimulateOptions {
  std::string strategies, gamma;
};

int cmd_simulate(const Options& opt, const SimulateOptions& c) {
  Run r(opt, "simulate");
  r.file = parse_spec(r.source);
  const auto& f = r.file;
  std::optional<Transducer> system;
  std::vector<std::string> names = split_list(c.strategies);
  for (const auto& n : names) {
    auto it = f.strategies.find(n);
    if (it == f.strategies.end()) throw UsageError("unknown strategy '" + n + "'");
    const auto& t = it->second.transducer;
    if (system && (system->outputs & t.outputs)) throw UsageError("strategies '" + c.strategies + "' share outputs");
    system = system ? compose(*system, t) : t;
  }
  Arena arena;
  arena.universe = f.arch.universe;
  arena.controlled = system ? system->outputs : 0;
  arena.plant = f.plant;
  arena.one_hot = f.arch.one_hot;

  const Lasso gamma = parse_lasso(r.u(), c.gamma);
  for (Valuation v : gamma.stem) {
    if (v & ~arena.env()) throw UsageError("the environment lasso assigns " + r.u().format(v & ~arena.env()));
  }
  for (Valuation v : gamma.loop) {
    if (v & ~arena.env()) throw UsageError("the environment lasso assigns " + r.u().format(v & ~arena.env()));
  }
  const Lasso w = system ? arena.run(*system, gamma) : arena.word(gamma, Lasso{{}, {0}});
  for (std::size_t i = 0; i < w.positions(); ++i) {
    if (!f.arch.one_hot.legal(w.at(i), f.arch.variables())) {
      throw UsageError("position " + std::to_string(i) + " violates a one-hot group: " + r.u().format(w.at(i)));
    }
  }

  r.report["strategies"] = names;
  r.report["gamma"] = io::lasso(r.u(), gamma);
  r.report["computation"] = io::lasso(r.u(), w.canonical());
  json priorities = json::object();
  r.text << "computation: " << format_lasso(r.u(), w.canonical()) << "\n";
  for (const auto& [name, spec] : f.objectives) {
    std::size_t k = achieved_priority_on_word(spec, w);
    priorities[name] = k;
    r.text << "  " << name << " achieves priority " << k << " of " << spec.size() << "\n";
  }
  r.report["priorities"] = priorities;
  return r.finish(kPositive);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dominant strategy and assumption synthesis for prioritized LTL objectives"};
  app.require_subcommand(1);
  Options opt;
  auto common = [&](CLI::App* sub) {
    sub->add_option("spec", opt.path, "spec file")->required();
    sub->add_flag("--json", opt.json, "machine-readable report");
  };

  auto* parse = app.add_subcommand("parse", "validate a spec file and summarize it");
  common(parse);

  CheckOptions check;
  auto* chk = app.add_subcommand("check", "check a strategy or an annotated assumption");
  common(chk);
  chk->add_option("--strategy", check.strategy, "named strategy from the spec file");
  chk->add_option("--strategy-file", check.strategy_file, "strategy JSON written by synthesize or propagate");
  chk->add_option("--assumption", check.assumption, "named annotated assumption from the spec file");
  chk->add_option("--assumption-file", check.assumption_file, "assumption JSON written by assume");
  chk->add_option("--mode", check.mode, "winning or dominant")->check(CLI::IsMember({"winning", "dominant"}));

  SynthOptions synth;
  auto* syn = app.add_subcommand("synthesize", "search for a strategy up to a state bound");
  common(syn);
  syn->add_option("--process", synth.processes, "process or comma-separated process group")->required();
  syn->add_option("--bound", synth.bound, "maximum number of states")->check(CLI::PositiveNumber);
  syn->add_option("--mode", synth.mode, "winning or dominant")->check(CLI::IsMember({"winning", "dominant"}));
  syn->add_option("--name", synth.name, "section name for the printed strategy");
  syn->add_option("-o,--output", opt.output, "write the strategy as JSON");

  AssumeOptions assume;
  auto* asm_ = app.add_subcommand("assume", "search for dominant annotated assumptions of one process");
  common(asm_);
  asm_->add_option("--process", assume.process, "process name")->required();
  asm_->add_option("--bound", assume.bound, "maximum number of branch nodes")->check(CLI::PositiveNumber);
  asm_->add_option("--limit", assume.limit, "number of generators to report");
  asm_->add_option("-o,--output", opt.output, "write the most permissive generator as JSON");

  PropagateOptions prop;
  auto* pro = app.add_subcommand("propagate", "propagate assumptions down a priority order");
  common(pro);
  pro->add_option("--order", prop.order, "processes from highest to lowest priority, comma-separated");
  pro->add_option("--bound", prop.bound, "maximum branch nodes per generator")->check(CLI::PositiveNumber);
  pro->add_option("-o,--output", opt.output, "write the joint strategy as JSON");

  SimulateOptions sim;
  auto* simc = app.add_subcommand("simulate", "run strategies against an environment lasso");
  common(simc);
  simc->add_option("--strategies", sim.strategies, "comma-separated strategy names")->required();
  simc->add_option("--gamma", sim.gamma, "environment lasso 'stem;loop', e.g. '{keep_o};{keep_o}'")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) return cmd_parse(opt);
    if (chk->parsed()) return cmd_check(opt, check);
    if (syn->parsed()) return cmd_synthesize(opt, synth);
    if (asm_->parsed()) return cmd_assume(opt, assume);
    if (pro->parsed()) return cmd_propagate(opt, prop);
    if (simc->parsed()) return cmd_simulate(opt, sim);
  } catch (const std::exception& e) {
    if (opt.json) {
      std::cout << json{{"format", io::kFormat}, {"error", e.what()}}.dump(2) << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return kError;
  }
  return kError;
}
