// Copyright 2026 The karr-assess Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "karr/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "karr/analysis.hpp"
#include "karr/baselines.hpp"
#include "karr/engine.hpp"
#include "karr/errors.hpp"
#include "karr/journal.hpp"
#include "karr/jsonl.hpp"
#include "karr/report.hpp"
#include "karr/scorer.hpp"
#include "karr/suite.hpp"

namespace karr {

namespace {

using nlohmann::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Options {
  std::string config_path;
  std::ostream* err = nullptr;
  std::string facts;
  std::string entities;
  std::string templates;
  std::string scorer;
  std::string out;
  std::string csv;
  bool resume = false;
  std::size_t cap = 0;
  std::size_t batch_size = 64;
  std::int64_t timeout_ms = 30000;
  std::size_t workers = 4;

  std::size_t k = 4;
  std::uint64_t seed = 0;
  std::optional<double> threshold;
  double ratio_cap = 1e6;
  std::string subject_pool = "fact-subjects";
  bool length_normalize = false;
  bool ate = false;

  std::string method = "karr";
  std::size_t prompts = 4;
  std::size_t lama_k = 1;
  std::size_t max_tokens = kDefaultMaxTokens;

  std::size_t variants = 2;
  std::string spurious;
  std::string report;
  std::string gold;
  double cutoff = 0.5;
  std::optional<double> target;
  std::vector<std::string> relations;
  std::size_t top_n = 5;
  std::size_t templates_per_relation = 3;
  std::size_t facts_per_relation = 100;
};

template <typename T>
void assign(T& var, const json& j) {
  var = j.get<T>();
}

template <typename T>
void assign(std::optional<T>& var, const json& j) {
  var = j.get<T>();
}

// Options that can also come from the --config file. A flag given on the
// command line wins; otherwise the config key (flag name with '_' for '-')
// applies; otherwise the built-in default stays.
class Knobs {
 public:
  template <typename T>
  CLI::Option* option(CLI::App* app, const std::string& name, T& var,
                      const std::string& help) {
    CLI::Option* opt = app->add_option("--" + name, var, help);
    track(opt, name, var);
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& name, bool& var,
                    const std::string& help) {
    CLI::Option* opt = app->add_flag("--" + name, var, help);
    track(opt, name, var);
    return opt;
  }

  void apply(const json& config) const {
    for (const auto& fn : appliers_) fn(config);
  }

 private:
  template <typename T>
  void track(CLI::Option* opt, std::string name, T& var) {
    std::replace(name.begin(), name.end(), '-', '_');
    appliers_.push_back([opt, name, &var](const json& config) {
      if (opt->count() > 0) return;
      auto it = config.find(name);
      if (it == config.end()) return;
      try {
        assign(var, *it);
      } catch (const json::exception&) {
        throw ValidationError("config key \"" + name + "\" has the wrong type");
      }
    });
  }

  std::vector<std::function<void(const json&)>> appliers_;
};

struct Command {
  CLI::App* app = nullptr;
  Knobs knobs;
  std::function<void()> run;
  bool writes_meta = true;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

// ---------------------------------------------------------------------------
// Shared plumbing

KnowledgeSuite load(const Options& o) {
  require(o.facts, "--facts");
  require(o.entities, "--entities");
  require(o.templates, "--templates");
  KnowledgeSuite suite = load_suite(o.facts, o.entities, o.templates);
  if (const std::size_t n = suite.truncated_template_count(); n > 0 && o.err) {
    *o.err << "warning: " << n
           << " template(s) truncated after a non-final [Y]\n";
  }
  return suite;
}

std::vector<Fact> facts_to_assess(const KnowledgeSuite& suite, const Options& o) {
  return o.cap > 0 ? sample_facts(suite, o.cap, o.seed) : suite.facts();
}

std::unique_ptr<Scorer> open_scorer(const Options& o, const KnowledgeSuite& suite) {
  require(o.scorer, "--scorer");
  if (o.batch_size < 1) throw ValidationError("--batch-size must be at least 1");
  if (o.timeout_ms < 1) throw ValidationError("--timeout-ms must be positive");
  RemoteOptions remote;
  remote.batch_size = o.batch_size;
  remote.timeout = std::chrono::milliseconds(o.timeout_ms);
  if (const char* token = std::getenv("ASSESS_SCORER_TOKEN")) {
    remote.bearer_token = token;
  }
  return make_scorer(o.scorer, &suite, remote);
}

KarrConfig karr_config(const Options& o) {
  KarrConfig c;
  c.k = o.k;
  c.seed = o.seed;
  c.threshold = o.threshold.value_or(22.0);
  c.ratio_cap = o.ratio_cap;
  c.length_normalize = o.length_normalize;
  c.subject_pool = subject_pool_from_string(o.subject_pool);
  c.with_ate = o.ate;
  c.workers = o.workers;
  c.validate();
  return c;
}

BaselineConfig baseline_config(const Options& o, BaselineMethod method) {
  if (o.workers < 1) throw ValidationError("--workers must be at least 1");
  if (o.prompts < 1) throw ValidationError("--prompts must be at least 1");
  if (o.max_tokens < 1) throw ValidationError("--max-tokens must be at least 1");
  BaselineConfig c;
  c.method = method;
  c.prompts = o.prompts;
  c.max_tokens = o.max_tokens;
  c.threshold = o.threshold.value_or(kDefaultKPromptsThreshold);
  c.seed = o.seed;
  c.workers = o.workers;
  return c;
}

// Inputs that determine the results; used as the journal fingerprint.
json inputs_json(const Options& o) {
  json j = {{"facts", o.facts},
            {"entities", o.entities},
            {"templates", o.templates},
            {"scorer", o.scorer},
            {"cap", o.cap}};
  if (o.cap > 0) j["cap_seed"] = o.seed;
  return j;
}

std::filesystem::path journal_path(const Options& o) {
  return o.out + ".journal.jsonl";
}

bool is_karr(const std::string& method) { return method == "karr"; }

// Known/unknown verdicts for `facts` under the selected method.
std::vector<bool> judge(const Options& o, const std::vector<Fact>& facts,
                        const KnowledgeSuite& suite, const Scorer& scorer) {
  std::vector<bool> known;
  if (is_karr(o.method)) {
    const KarrConfig c = karr_config(o);
    for (const auto& r : assess_suite(facts, suite, scorer, c).per_fact) {
      known.push_back(r.known(c.threshold));
    }
  } else {
    const BaselineConfig c =
        baseline_config(o, baseline_method_from_string(o.method));
    for (const auto& v : run_baseline(facts, suite, scorer, c).per_fact) {
      known.push_back(v.known);
    }
  }
  return known;
}

double overall_score(const Options& o, const std::vector<Fact>& facts,
                     const KnowledgeSuite& suite, const Scorer& scorer) {
  if (is_karr(o.method)) {
    return assess_suite(facts, suite, scorer, karr_config(o)).overall_karr_score;
  }
  return run_baseline(facts, suite, scorer,
                      baseline_config(o, baseline_method_from_string(o.method)))
      .overall_score;
}

json method_config_json(const Options& o) {
  json j = is_karr(o.method)
               ? config_to_json(karr_config(o))
               : config_to_json(
                     baseline_config(o, baseline_method_from_string(o.method)));
  j["method"] = o.method;
  return j;
}

json study_json(const char* study, const Options& o, json config) {
  return {{"schema_version", kReportSchemaVersion},
          {"study", study},
          {"method", o.method},
          {"config", std::move(config)}};
}

void maybe_write(const Options& o, const json& j) {
  if (!o.out.empty()) write_json_file(o.out, j);
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_run(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const KnowledgeSuite suite = load(o);
  const auto facts = facts_to_assess(suite, o);
  const auto scorer = open_scorer(o, suite);
  const KarrConfig config = karr_config(o);

  json fingerprint = config_to_json(config);
  fingerprint.update(inputs_json(o));
  Journal journal(journal_path(o), fingerprint.dump(), o.resume);

  const SuiteReport report = assess_suite(facts, suite, *scorer, config, &journal);
  json echo = fingerprint;
  echo["workers"] = o.workers;
  write_json_file(o.out, report_to_json(report, echo));
  if (!o.csv.empty()) write_karr_csv(o.csv, report);
  out << "overall_karr_score " << fixed(report.overall_karr_score) << " ("
      << report.known << "/" << report.assessed << " known, "
      << report.object_all_oov << " object_all_oov)\n";
}

void cmd_baseline(const Options& o, BaselineMethod method, std::ostream& out) {
  require(o.out, "--out");
  const KnowledgeSuite suite = load(o);
  const auto facts = facts_to_assess(suite, o);
  const auto scorer = open_scorer(o, suite);
  const BaselineConfig config = baseline_config(o, method);

  json fingerprint = config_to_json(config);
  fingerprint.update(inputs_json(o));
  Journal journal(journal_path(o), fingerprint.dump(), o.resume);

  const BaselineReport report = run_baseline(facts, suite, *scorer, config, &journal);
  json echo = fingerprint;
  echo["workers"] = o.workers;
  write_json_file(o.out, report_to_json(report, echo));
  if (!o.csv.empty()) write_baseline_csv(o.csv, report);
  out << to_string(method) << "_score " << fixed(report.overall_score) << " ("
      << report.known << "/" << report.assessed << " known)\n";
}

void cmd_variance(const Options& o, std::ostream& out) {
  const KnowledgeSuite suite = load(o);
  const auto facts = facts_to_assess(suite, o);
  const auto scorer = open_scorer(o, suite);
  const SpreadStats stats =
      variance_study(suite, o.variants, [&](const KnowledgeSuite& variant) {
        return overall_score(o, facts, variant, *scorer);
      });
  json config = method_config_json(o);
  config.update(inputs_json(o));
  config["variants"] = o.variants;
  json j = study_json("variance", o, std::move(config));
  j["variance"] = stats.variance;
  j["stddev"] = stats.stddev;
  j["per_variant_scores"] = stats.per_variant_scores;
  maybe_write(o, j);
  out << "variance " << fixed(stats.variance) << " stddev " << fixed(stats.stddev)
      << "\n";
}

void cmd_spurious(const Options& o, std::ostream& out) {
  require(o.spurious, "--spurious");
  const KnowledgeSuite suite = load(o);
  const auto real = facts_to_assess(suite, o);
  const auto spurious = load_spurious_facts(o.spurious);
  if (spurious.empty()) throw ValidationError(o.spurious + " has no facts");
  const auto scorer = open_scorer(o, suite);

  std::vector<Fact> all = real;
  for (const auto& s : spurious) all.push_back(s.as_fact());
  const std::vector<bool> known = judge(o, all, suite, *scorer);
  std::map<Fact, bool> verdicts;
  for (std::size_t i = 0; i < all.size(); ++i) verdicts[all[i]] = known[i];

  const SpuriousMetrics m = spurious_metrics(
      [&](const Fact& f) { return verdicts.at(f); }, real, spurious);
  json config = method_config_json(o);
  config.update(inputs_json(o));
  config["spurious"] = o.spurious;
  json j = study_json("spurious", o, std::move(config));
  j["sp"] = m.sp;
  j["true_positive_rate"] = m.true_positive_rate;
  j["delta_p"] = m.delta_p;
  j["spurious_known"] = m.spurious_known;
  j["spurious_total"] = m.spurious_total;
  j["real_known"] = m.real_known;
  j["real_total"] = m.real_total;
  maybe_write(o, j);
  out << "sp " << fixed(m.sp) << " true_positive_rate "
      << fixed(m.true_positive_rate) << " delta_p " << fixed(m.delta_p) << "\n";
}

void cmd_tau(const Options& o, std::ostream& out) {
  require(o.report, "--report");
  require(o.gold, "--gold");
  const KendallResult r =
      kendall_tau(load_report_scores(o.report), load_gold_labels(o.gold));
  json j = {{"schema_version", kReportSchemaVersion},
            {"study", "tau"},
            {"config", {{"report", o.report}, {"gold", o.gold}}},
            {"tau", r.tau ? json(*r.tau) : json(nullptr)},
            {"p_value", r.p_value ? json(*r.p_value) : json(nullptr)},
            {"p_method", r.p_method},
            {"n", r.n},
            {"s", r.s}};
  maybe_write(o, j);
  if (!r.tau) {
    out << "tau undefined (constant input) n " << r.n << "\n";
    return;
  }
  out << "tau " << fixed(*r.tau) << " p_value " << fixed(*r.p_value) << " ("
      << r.p_method << ") n " << r.n << "\n";
}

void cmd_recall(const Options& o, std::ostream& out) {
  require(o.report, "--report");
  require(o.gold, "--gold");
  const RecallResult r = recall_unknown(load_report_scores(o.report),
                                        load_gold_labels(o.gold), o.cutoff);
  json j = {{"schema_version", kReportSchemaVersion},
            {"study", "recall"},
            {"config", {{"report", o.report}, {"gold", o.gold}, {"cutoff", o.cutoff}}},
            {"recall", r.recall ? json(*r.recall) : json(nullptr)},
            {"positives", r.positives},
            {"flagged", r.flagged}};
  maybe_write(o, j);
  if (!r.recall) {
    out << "recall undefined (no gold fact below cutoff)\n";
    return;
  }
  out << "recall " << fixed(*r.recall) << " (" << r.flagged << "/" << r.positives
      << ")\n";
}

void cmd_calibrate(const Options& o, std::ostream& out) {
  require(o.report, "--report");
  if (!o.target) throw UsageError("--target is required");
  std::vector<double> scores;
  for (const auto& m : load_report_scores(o.report)) {
    if (m.score) scores.push_back(*m.score);
  }
  const Calibration c = calibrate_threshold(scores, *o.target);
  json j = {{"schema_version", kReportSchemaVersion},
            {"study", "calibrate"},
            {"config", {{"report", o.report}, {"target", *o.target}}},
            {"threshold", c.threshold},
            {"achieved_fraction", c.achieved_fraction},
            {"scored_facts", scores.size()}};
  maybe_write(o, j);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c.threshold);
  out << "threshold " << buf << " achieved_fraction " << fixed(c.achieved_fraction)
      << "\n";
}

void cmd_synth_spurious(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const KnowledgeSuite suite = load(o);
  const auto scorer = open_scorer(o, suite);
  std::vector<RelationId> relations;
  if (o.relations.empty()) {
    relations = suite.relation_ids();
  } else {
    for (const auto& r : o.relations) {
      if (!suite.has_relation(RelationId(r))) {
        throw ValidationError("unknown relation " + r);
      }
      relations.emplace_back(r);
    }
  }
  SpuriousOptions opts;
  opts.top_n = o.top_n;
  opts.templates_per_relation = o.templates_per_relation;
  opts.facts_per_relation = o.facts_per_relation;
  opts.max_tokens = o.max_tokens;
  opts.seed = o.seed;
  const SpuriousSynthesis s = spurious_synthesize(suite, relations, *scorer, opts);
  write_spurious_facts(o.out, s.facts);
  for (const auto& [rel, obj] : s.high_frequency_object) {
    out << "high_frequency_object " << rel.str() << " " << obj.str() << "\n";
  }
  for (const auto& rel : s.skipped) out << "skipped " << rel.str() << "\n";
  out << "spurious_facts " << s.facts.size() << "\n";
}

void cmd_sample_facts(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  if (o.cap == 0) throw UsageError("--cap is required");
  const KnowledgeSuite suite = load(o);
  const auto facts = sample_facts(suite, o.cap, o.seed);
  write_facts(o.out, facts);
  out << "sampled_facts " << facts.size() << "\n";
}

// ---------------------------------------------------------------------------
// Option groups

void add_config(Command& c, Options& o) {
  c.app->add_option("--config", o.config_path,
                    "JSON file of option defaults (flags override it)");
}

void add_suite(Command& c, Options& o) {
  c.knobs.option(c.app, "facts", o.facts, "Facts JSON-lines file");
  c.knobs.option(c.app, "entities", o.entities, "Entity catalog JSON-lines file");
  c.knobs.option(c.app, "templates", o.templates, "Relation templates JSON-lines file");
  c.knobs.option(c.app, "cap", o.cap, "Assess at most N sampled facts per relation");
}

void add_scorer(Command& c, Options& o) {
  c.knobs.option(c.app, "scorer", o.scorer, "table:PATH, remote:URL or uniform");
  c.knobs.option(c.app, "batch-size", o.batch_size, "Remote scoring batch size")
      ->capture_default_str();
  c.knobs.option(c.app, "timeout-ms", o.timeout_ms, "Remote request timeout")
      ->capture_default_str();
  c.knobs.option(c.app, "workers", o.workers, "Worker threads")
      ->capture_default_str();
}

void add_karr(Command& c, Options& o) {
  c.knobs.option(c.app, "k", o.k, "Subjects (and relations) sampled per fact")
      ->capture_default_str();
  c.knobs.option(c.app, "seed", o.seed, "Sampling seed")->capture_default_str();
  c.knobs.option(c.app, "threshold", o.threshold,
                 "Known threshold (default 22 for karr, 0.13 for kprompts)");
  c.knobs.option(c.app, "ratio-cap", o.ratio_cap, "Cap for ratios")
      ->capture_default_str();
  c.knobs.option(c.app, "subject-pool", o.subject_pool,
                 "fact-subjects or catalog")
      ->capture_default_str();
  c.knobs.flag(c.app, "length-normalize", o.length_normalize,
               "Divide prompt log-priors by token count");
  c.knobs.flag(c.app, "ate", o.ate, "Also report the treatment effect per fact");
}

void add_baseline_knobs(Command& c, Options& o) {
  c.knobs.option(c.app, "prompts", o.prompts, "K-Prompts sample size")
      ->capture_default_str();
  c.knobs.option(c.app, "max-tokens", o.max_tokens, "Generation length")
      ->capture_default_str();
}

void add_output(Command& c, Options& o, bool with_journal) {
  c.knobs.option(c.app, "out", o.out, "Output path");
  if (with_journal) {
    c.knobs.option(c.app, "csv", o.csv, "Also write a per-fact CSV table");
    c.app->add_flag("--resume", o.resume,
                    "Skip facts already recorded in <out>.journal.jsonl");
  }
}

CLI::App* deepest(CLI::App* app) {
  for (CLI::App* sub : app->get_subcommands()) return deepest(sub);
  return app;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Statistical knowledge assessment of language models", "assess"};
  app.require_subcommand(1);
  Options o;
  o.err = &err;
  std::vector<std::unique_ptr<Command>> commands;
  auto command = [&](CLI::App* parent, const std::string& name,
                     const std::string& help) -> Command& {
    auto c = std::make_unique<Command>();
    c->app = parent->add_subcommand(name, help);
    commands.push_back(std::move(c));
    Command& ref = *commands.back();
    add_config(ref, o);
    return ref;
  };

  {
    Command& c = command(&app, "run", "Assess facts with KaRR");
    add_suite(c, o);
    add_scorer(c, o);
    add_karr(c, o);
    add_output(c, o, true);
    c.run = [&] { cmd_run(o, out); };
  }
  CLI::App* baseline = app.add_subcommand("baseline", "Run a baseline probe");
  baseline->require_subcommand(1);
  for (auto [name, method] :
       {std::pair{"lama", BaselineMethod::kLama1},
        std::pair{"kprompts", BaselineMethod::kKPrompts},
        std::pair{"consistent-acc", BaselineMethod::kConsistentAcc}}) {
    Command& c = command(baseline, name, std::string("Baseline ") + name);
    add_suite(c, o);
    add_scorer(c, o);
    add_baseline_knobs(c, o);
    add_output(c, o, true);
    if (method == BaselineMethod::kLama1) {
      c.knobs.option(c.app, "k", o.lama_k, "Generations checked (1 or 10)")
          ->check(CLI::IsMember({1, 10}))
          ->capture_default_str();
    } else if (method == BaselineMethod::kKPrompts) {
      c.knobs.option(c.app, "seed", o.seed, "Prompt sampling seed");
      c.knobs.option(c.app, "threshold", o.threshold, "Known threshold (0.13)");
    }
    c.run = [&o, &out, method = method] {
      BaselineMethod m = method;
      if (m == BaselineMethod::kLama1 && o.lama_k == 10) m = BaselineMethod::kLama10;
      cmd_baseline(o, m, out);
    };
  }
  CLI::App* analyze = app.add_subcommand("analyze", "Meta-evaluations");
  analyze->require_subcommand(1);
  {
    Command& c = command(analyze, "variance", "Score spread across template variants");
    add_suite(c, o);
    add_scorer(c, o);
    add_karr(c, o);
    add_baseline_knobs(c, o);
    c.knobs.option(c.app, "method", o.method,
                   "karr, lama1, lama10, kprompts or consistent-acc")
        ->capture_default_str();
    c.knobs.option(c.app, "variants", o.variants, "Template variants per relation")
        ->capture_default_str();
    add_output(c, o, false);
    c.run = [&] { cmd_variance(o, out); };
  }
  {
    Command& c = command(analyze, "spurious", "SP and delta-P on spurious facts");
    add_suite(c, o);
    add_scorer(c, o);
    add_karr(c, o);
    add_baseline_knobs(c, o);
    c.knobs.option(c.app, "method", o.method,
                   "karr, lama1, lama10, kprompts or consistent-acc")
        ->capture_default_str();
    c.knobs.option(c.app, "spurious", o.spurious, "Spurious facts JSON-lines file");
    add_output(c, o, false);
    c.run = [&] { cmd_spurious(o, out); };
  }
  {
    Command& c = command(analyze, "tau", "Kendall tau-b against gold scores");
    c.knobs.option(c.app, "report", o.report, "Report JSON");
    c.knobs.option(c.app, "gold", o.gold, "Gold labels JSON-lines file");
    add_output(c, o, false);
    c.run = [&] { cmd_tau(o, out); };
  }
  {
    Command& c = command(analyze, "recall", "Recall of gold-unknown facts");
    c.knobs.option(c.app, "report", o.report, "Report JSON");
    c.knobs.option(c.app, "gold", o.gold, "Gold labels JSON-lines file");
    c.knobs.option(c.app, "cutoff", o.cutoff, "Gold score below which a fact is unknown")
        ->capture_default_str();
    add_output(c, o, false);
    c.run = [&] { cmd_recall(o, out); };
  }
  {
    Command& c = command(&app, "calibrate", "Threshold for a target known fraction");
    c.knobs.option(c.app, "report", o.report, "Report JSON");
    c.knobs.option(c.app, "target", o.target, "Target known fraction in [0, 1]");
    add_output(c, o, false);
    c.run = [&] { cmd_calibrate(o, out); };
  }
  {
    Command& c = command(&app, "synth-spurious", "Synthesize spurious facts");
    add_suite(c, o);
    add_scorer(c, o);
    c.knobs.option(c.app, "relations", o.relations, "Relations to use (default all)");
    c.knobs.option(c.app, "top-n", o.top_n, "Continuations per template")
        ->capture_default_str();
    c.knobs.option(c.app, "templates-per-relation", o.templates_per_relation,
                   "Subject-free templates per relation")
        ->capture_default_str();
    c.knobs.option(c.app, "facts-per-relation", o.facts_per_relation,
                   "Facts sampled per relation")
        ->capture_default_str();
    c.knobs.option(c.app, "max-tokens", o.max_tokens, "Generation length")
        ->capture_default_str();
    c.knobs.option(c.app, "seed", o.seed, "Sampling seed");
    add_output(c, o, false);
    c.run = [&] { cmd_synth_spurious(o, out); };
  }
  {
    Command& c = command(&app, "sample-facts", "Per-relation fact sample");
    add_suite(c, o);
    c.knobs.option(c.app, "seed", o.seed, "Sampling seed");
    add_output(c, o, false);
    c.run = [&] { cmd_sample_facts(o, out); };
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << deepest(&app)->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << deepest(&app)->help();
    return kExitInvalid;
  }

  Command* chosen = nullptr;
  for (auto& c : commands) {
    if (c->app->parsed()) chosen = c.get();
  }
  if (chosen == nullptr) {
    err << app.help();
    return kExitInvalid;
  }

  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();
  try {
    if (!o.config_path.empty()) {
      const json config = read_json_file(o.config_path);
      if (!config.is_object()) {
        throw ValidationError(o.config_path + ": config must be a JSON object");
      }
      chosen->knobs.apply(config);
    }
    chosen->run();
    if (!o.out.empty() && chosen->writes_meta) {
      const double elapsed = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
      write_json_file(o.out + ".meta.json",
                      {{"started_at", started_at},
                       {"finished_at", utc_now()},
                       {"elapsed_seconds", elapsed},
                       {"argv", args}});
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->app->help();
    return kExitInvalid;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

int dispatch(int argc, const char* const* argv) {
  return dispatch(std::vector<std::string>(argv, argv + argc), std::cout,
                  std::cerr);
}

}  // namespace karr
