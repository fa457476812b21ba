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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "karr/analysis.hpp"
#include "karr/baselines.hpp"
#include "karr/cli.hpp"
#include "karr/engine.hpp"
#include "karr/errors.hpp"
#include "karr/report.hpp"
#include "karr/scorer.hpp"
#include "karr/suite.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

struct PySuite {
  std::shared_ptr<const karr::KnowledgeSuite> suite;
};

// Owns the suite a scorer may point into.
struct PyScorer {
  std::shared_ptr<const karr::KnowledgeSuite> suite;
  std::shared_ptr<const karr::Scorer> scorer;
};

karr::Fact to_fact(const std::tuple<std::string, std::string, std::string>& t) {
  return {karr::EntityId(std::get<0>(t)), karr::RelationId(std::get<1>(t)),
          karr::EntityId(std::get<2>(t))};
}

karr::KarrConfig karr_config(std::size_t k, std::uint64_t seed, double threshold,
                             double ratio_cap, const std::string& pool,
                             bool length_normalize, bool with_ate, std::size_t workers) {
  karr::KarrConfig c;
  c.k = k;
  c.seed = seed;
  c.threshold = threshold;
  c.ratio_cap = ratio_cap;
  c.subject_pool = karr::subject_pool_from_string(pool);
  c.length_normalize = length_normalize;
  c.with_ate = with_ate;
  c.workers = workers;
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_karr, m) {
  m.doc() = "Native core of karr_assess";

  // Later registrations are tried first, so the base goes first.
  auto error = py::register_exception<karr::Error>(m, "Error");
  py::register_exception<karr::ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<karr::TransportError>(m, "TransportError", error.ptr());

  py::class_<PySuite>(m, "Suite")
      .def_static(
          "load",
          [](const std::string& facts, const std::string& entities,
             const std::string& templates) {
            return PySuite{std::make_shared<const karr::KnowledgeSuite>(
                karr::load_suite(facts, entities, templates))};
          },
          py::arg("facts"), py::arg("entities"), py::arg("templates"))
      .def_property_readonly("facts",
                             [](const PySuite& s) {
                               std::vector<std::tuple<std::string, std::string, std::string>> out;
                               for (const auto& f : s.suite->facts()) {
                                 out.emplace_back(f.subject.str(), f.relation.str(),
                                                  f.object.str());
                               }
                               return out;
                             })
      .def_property_readonly("relations",
                             [](const PySuite& s) {
                               std::vector<std::string> out;
                               for (const auto& r : s.suite->relation_ids()) out.push_back(r.str());
                               return out;
                             })
      .def("aliases",
           [](const PySuite& s, const std::string& id) {
             return s.suite->entity(karr::EntityId(id)).aliases;
           })
      .def_property_readonly("truncated_templates",
                             [](const PySuite& s) { return s.suite->truncated_template_count(); });

  py::class_<PyScorer>(m, "Scorer")
      .def_static(
          "open",
          [](const std::string& spec, const PySuite* suite, std::size_t batch_size,
             int timeout_ms, const std::string& token) {
            karr::RemoteOptions remote;
            remote.batch_size = batch_size;
            remote.timeout = std::chrono::milliseconds(timeout_ms);
            remote.bearer_token = token;
            PyScorer out;
            if (suite != nullptr) out.suite = suite->suite;
            out.scorer = karr::make_scorer(spec, out.suite.get(), remote);
            return out;
          },
          py::arg("spec"), py::arg("suite") = nullptr, py::arg("batch_size") = 64,
          py::arg("timeout_ms") = 30000, py::arg("token") = "")
      .def_property_readonly("name", [](const PyScorer& s) { return s.scorer->name(); })
      .def(
          "score",
          [](const PyScorer& s, const std::vector<std::pair<std::string, std::string>>& items) {
            std::vector<karr::ScoreItem> batch;
            for (const auto& [prefix, cont] : items) batch.push_back({prefix, cont});
            std::vector<karr::ScoreResult> results;
            {
              py::gil_scoped_release release;
              results = s.scorer->score_conditional_batch(batch);
            }
            return karr::score_results_to_json(results).dump();
          },
          py::arg("items"))
      .def(
          "topk",
          [](const PyScorer& s, const std::string& prefix, std::size_t k,
             std::size_t max_tokens) {
            std::vector<karr::TopKItem> items;
            {
              py::gil_scoped_release release;
              items = s.scorer->topk_continuations(prefix, k, max_tokens);
            }
            return karr::topk_to_json(items).dump();
          },
          py::arg("prefix"), py::arg("k"), py::arg("max_tokens") = karr::kDefaultMaxTokens);

  m.def(
      "karr_fact",
      [](const PySuite& suite, const PyScorer& scorer,
         const std::tuple<std::string, std::string, std::string>& fact, std::size_t k,
         std::uint64_t seed, double threshold, double ratio_cap, const std::string& pool,
         bool length_normalize, bool with_ate) {
        const auto c = karr_config(k, seed, threshold, ratio_cap, pool, length_normalize,
                                   with_ate, 1);
        karr::KarrResult r;
        {
          py::gil_scoped_release release;
          r = karr::karr_fact(to_fact(fact), *suite.suite, *scorer.scorer, c);
        }
        json j = karr::to_json(r);
        j["known"] = r.known(c.threshold);
        return j.dump();
      },
      py::arg("suite"), py::arg("scorer"), py::arg("fact"), py::arg("k") = 4,
      py::arg("seed") = 0, py::arg("threshold") = 22.0, py::arg("ratio_cap") = 1e6,
      py::arg("subject_pool") = "fact-subjects", py::arg("length_normalize") = false,
      py::arg("with_ate") = false);

  m.def(
      "assess",
      [](const PySuite& suite, const PyScorer& scorer, std::size_t k, std::uint64_t seed,
         double threshold, double ratio_cap, const std::string& pool,
         bool length_normalize, bool with_ate, std::size_t workers) {
        const auto c = karr_config(k, seed, threshold, ratio_cap, pool, length_normalize,
                                   with_ate, workers);
        karr::SuiteReport report;
        {
          py::gil_scoped_release release;
          report = karr::assess_suite(suite.suite->facts(), *suite.suite, *scorer.scorer, c);
        }
        return karr::report_to_json(report).dump();
      },
      py::arg("suite"), py::arg("scorer"), py::arg("k") = 4, py::arg("seed") = 0,
      py::arg("threshold") = 22.0, py::arg("ratio_cap") = 1e6,
      py::arg("subject_pool") = "fact-subjects", py::arg("length_normalize") = false,
      py::arg("with_ate") = false, py::arg("workers") = 4);

  m.def(
      "baseline",
      [](const PySuite& suite, const PyScorer& scorer, const std::string& method,
         std::size_t prompts, std::size_t max_tokens, double threshold, std::uint64_t seed,
         std::size_t workers) {
        karr::BaselineConfig c;
        c.method = karr::baseline_method_from_string(method);
        c.prompts = prompts;
        c.max_tokens = max_tokens;
        c.threshold = threshold;
        c.seed = seed;
        c.workers = workers;
        karr::BaselineReport report;
        {
          py::gil_scoped_release release;
          report = karr::run_baseline(suite.suite->facts(), *suite.suite, *scorer.scorer, c);
        }
        return karr::report_to_json(report).dump();
      },
      py::arg("suite"), py::arg("scorer"), py::arg("method"), py::arg("prompts") = 4,
      py::arg("max_tokens") = karr::kDefaultMaxTokens,
      py::arg("threshold") = karr::kDefaultKPromptsThreshold, py::arg("seed") = 0,
      py::arg("workers") = 4);

  m.def(
      "kendall_tau",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto r = karr::kendall_tau(x, y);
        json j = {{"n", r.n}, {"s", r.s}, {"p_method", r.p_method}};
        j["tau"] = r.tau ? json(*r.tau) : json(nullptr);
        j["p_value"] = r.p_value ? json(*r.p_value) : json(nullptr);
        return j.dump();
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "calibrate_threshold",
      [](const std::vector<double>& scores, double target) {
        const auto c = karr::calibrate_threshold(scores, target);
        return std::make_pair(c.threshold, c.achieved_fraction);
      },
      py::arg("scores"), py::arg("target"));

  m.def("subject_free_template", &karr::subject_free_template, py::arg("text"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "assess");
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = karr::dispatch(args, out, err);
        }
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
