// Copyright 2026 The speccf Authors. All Rights Reserved.
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


// speccf: train, recommend, eval, synth, plsi-train, bounds.
// Exit codes: 0 success, 1 usage error, 2 data or model error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "speccf/bounds.hpp"
#include "speccf/data.hpp"
#include "speccf/error.hpp"
#include "speccf/eval.hpp"
#include "speccf/model.hpp"
#include "speccf/pipeline.hpp"
#include "speccf/plsi.hpp"
#include "speccf/synth.hpp"

namespace {

using namespace speccf;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct SchemaFlags {
  std::string delimiter;
  int user_column = 0;
  int item_column = 1;

  void add(CLI::App* app) {
    app->add_option("--delimiter", delimiter, "Field separator: tab, comma (default: per line)")
        ->check(CLI::IsMember({"tab", "comma"}));
    app->add_option("--user-column", user_column, "Zero-based user column")->check(CLI::NonNegativeNumber);
    app->add_option("--item-column", item_column, "Zero-based item column")->check(CLI::NonNegativeNumber);
  }

  TripletSchema schema() const {
    TripletSchema s;
    s.user_column = user_column;
    s.item_column = item_column;
    if (delimiter == "tab") s.delimiter = '\t';
    if (delimiter == "comma") s.delimiter = ',';
    return s;
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return in;
}

void print_train_summary(const TrainDiagnostics& d) {
  std::cerr << "users " << d.n_users << "  items " << d.n_items << "  nnz " << d.nnz
            << "  passes " << d.passes << '\n';
  std::cerr << "spectrum";
  for (Index i = 0; i < d.spectrum.size(); ++i) std::cerr << ' ' << d.spectrum(i);
  std::cerr << "\n|sum lambda^-2 - 1| " << d.lambda_mass_deviation << "  whitening error "
            << d.whitening_error << '\n';
  for (const auto& [stage, secs] : d.stage_seconds) {
    std::cerr << "  " << stage << ' ' << secs << " s\n";
  }
  std::cerr << "total " << d.total_seconds << " s\n";
}

// Scores for every training user under either model.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual Eigen::VectorXd scores(Index user, std::span<const ItemId> history) const = 0;
  virtual Index d() const = 0;
};

class MomScorer : public Scorer {
 public:
  explicit MomScorer(MomModel m) : m_(std::move(m)) {}
  Eigen::VectorXd scores(Index, std::span<const ItemId> history) const override {
    return predict_scores(history, m_);
  }
  Index d() const override { return m_.d(); }

 private:
  MomModel m_;
};

class PlsiScorer : public Scorer {
 public:
  explicit PlsiScorer(PlsiModel m) : m_(std::move(m)) {}
  Eigen::VectorXd scores(Index user, std::span<const ItemId>) const override {
    return plsi_predict(user, m_);
  }
  Index d() const override { return m_.d(); }

 private:
  PlsiModel m_;
};

std::unique_ptr<Scorer> load_scorer(const std::string& model, const std::string& plsi_model) {
  if (!model.empty()) return std::make_unique<MomScorer>(load_model(model));
  return std::make_unique<PlsiScorer>(load_plsi(plsi_model));
}

void check_dims(const Scorer& s, const Dataset& train) {
  if (s.d() != train.matrix.n_items()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "model has " + std::to_string(s.d()) + " items but training data has " +
                    std::to_string(train.matrix.n_items()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Method-of-moments collaborative filtering for implicit feedback"};
  app.require_subcommand(1);

  // train
  TrainConfig train_cfg;
  SchemaFlags train_schema;
  auto* train = app.add_subcommand("train", "Fit a latent-class model from interaction triplets");
  train->add_option("--input", train_cfg.input, "Interaction file (user, item per line)")->required();
  train->add_option("--output", train_cfg.output, "Model file to write")->required();
  train->add_option("--k", train_cfg.k, "Number of latent classes")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--seed", train_cfg.seed, "Random seed")->capture_default_str();
  train->add_option("--eig-tol", train_cfg.eig_tol, "Eigen-residual tolerance")->capture_default_str();
  train->add_option("--eig-max-iter", train_cfg.eig_max_iter, "Eigensolver restart cap (0: 300 K)");
  train->add_option("--restarts", train_cfg.restarts, "Power-method restarts (0: 50 K)");
  train->add_option("--iters", train_cfg.iters, "Power iterations per restart")->capture_default_str();
  bool no_diagonal = false;
  train->add_flag("--no-diagonal", no_diagonal, "Drop self-pairs from the pairwise moment");
  train->add_option("--posteriors", train_cfg.posteriors_output, "Write P[h|u] per user");
  train->add_option("--diagnostics", train_cfg.diagnostics_output, "Write diagnostics JSON");
  train_schema.add(train);

  // recommend
  std::string rec_model, rec_plsi, rec_train, rec_users_file;
  Index rec_tau = 10;
  bool rec_include_seen = false;
  SchemaFlags rec_schema;
  auto* recommend = app.add_subcommand("recommend", "Top-tau items per user to standard output");
  auto* rec_model_opt = recommend->add_option("--model", rec_model, "Moment model file");
  auto* rec_plsi_opt = recommend->add_option("--plsi-model", rec_plsi, "PLSI model file");
  rec_model_opt->excludes(rec_plsi_opt);
  recommend->add_option("--train", rec_train, "Training interactions the model was fit on")->required();
  recommend->add_option("--tau", rec_tau, "List length")->capture_default_str()->check(CLI::PositiveNumber);
  recommend->add_option("--users", rec_users_file, "File with one user key per line (default: all)");
  recommend->add_flag("--include-seen", rec_include_seen, "Allow items already in the history");
  rec_schema.add(recommend);

  // eval
  std::string ev_model, ev_plsi, ev_train, ev_test, ev_output;
  std::vector<Index> ev_tau = kDefaultTauList;
  bool ev_random = false;
  std::uint64_t ev_seed = 42;
  SchemaFlags ev_schema;
  auto* eval = app.add_subcommand("eval", "Precision, recall and MAP at each cutoff");
  auto* ev_model_opt = eval->add_option("--model", ev_model, "Moment model file");
  auto* ev_plsi_opt = eval->add_option("--plsi-model", ev_plsi, "PLSI model file");
  auto* ev_random_opt = eval->add_flag("--random", ev_random, "Score a uniformly random ranker");
  ev_model_opt->excludes(ev_plsi_opt)->excludes(ev_random_opt);
  ev_plsi_opt->excludes(ev_random_opt);
  eval->add_option("--train", ev_train, "Training interactions")->required();
  eval->add_option("--test", ev_test, "Held-out interactions")->required();
  eval->add_option("--tau", ev_tau, "Cutoffs")->delimiter(',');
  eval->add_option("--seed", ev_seed, "Seed for --random")->capture_default_str();
  eval->add_option("--output", ev_output, "Report file (default: standard output)");
  ev_schema.add(eval);

  // synth
  Index sy_k = 3, sy_d = 50, sy_n = 1000, sy_min = 3, sy_max = 10;
  std::uint64_t sy_seed = 42;
  double sy_concentration = 0.5;
  bool sy_separable = false;
  std::string sy_output, sy_truth;
  auto* synth = app.add_subcommand("synth", "Sample interactions from a planted model");
  synth->add_option("--k", sy_k, "Latent classes")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--d", sy_d, "Items")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--n", sy_n, "Users")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--min-items", sy_min, "Fewest items per user")->capture_default_str();
  synth->add_option("--max-items", sy_max, "Most items per user")->capture_default_str();
  synth->add_option("--seed", sy_seed, "Random seed")->capture_default_str();
  synth->add_option("--concentration", sy_concentration, "Dirichlet concentration of O columns")
      ->capture_default_str();
  synth->add_flag("--separable", sy_separable, "Disjoint uniform item blocks per class");
  synth->add_option("--output", sy_output, "Triplet file to write")->required();
  synth->add_option("--truth", sy_truth, "Write the planted model in model-file format");

  // plsi-train
  PlsiOptions plsi_opts;
  std::string pl_input, pl_output, pl_trace;
  SchemaFlags pl_schema;
  auto* plsi = app.add_subcommand("plsi-train", "Fit the PLSI baseline by EM");
  plsi->add_option("--input", pl_input, "Interaction file")->required();
  plsi->add_option("--output", pl_output, "PLSI model file to write")->required();
  plsi->add_option("--k", plsi_opts.k, "Number of latent classes")->capture_default_str()->check(CLI::PositiveNumber);
  plsi->add_option("--seed", plsi_opts.seed, "Random seed")->capture_default_str();
  plsi->add_option("--rel-tol", plsi_opts.rel_tol, "Relative log-likelihood improvement to continue")
      ->capture_default_str();
  plsi->add_option("--max-iter", plsi_opts.max_iter, "EM iteration cap")->capture_default_str();
  plsi->add_option("--trace", pl_trace, "Write the log-likelihood trace");
  pl_schema.add(plsi);

  // bounds
  BoundInputs bi;
  std::string bo_input, bo_model;
  bool bo_tsv = false;
  SchemaFlags bo_schema;
  auto* bounds = app.add_subcommand("bounds", "Sample-size thresholds and parameter-error bounds");
  bounds->add_option("--input", bo_input, "Interaction file to take N, d2s, d3s and the spectrum from");
  bounds->add_option("--model", bo_model, "Model file to take pi_max, pi_min from");
  auto* bo_sigma1 = bounds->add_option("--sigma1", bi.sigma1, "Largest eigenvalue of M2");
  auto* bo_sigmak = bounds->add_option("--sigmaK", bi.sigmaK, "K-th eigenvalue of M2");
  auto* bo_d2s = bounds->add_option("--d2s", bi.d2s, "Mean nnz^2 per user");
  auto* bo_d3s = bounds->add_option("--d3s", bi.d3s, "Mean nnz^3 per user");
  auto* bo_k = bounds->add_option("--k", bi.k, "Number of latent classes");
  auto* bo_n = bounds->add_option("--n", bi.n, "Number of users");
  auto* bo_pimax = bounds->add_option("--pi-max", bi.pi_max, "Largest mixing weight");
  auto* bo_pimin = bounds->add_option("--pi-min", bi.pi_min, "Smallest mixing weight");
  bounds->add_option("--delta", bi.delta, "Failure probability")->capture_default_str();
  bounds->add_option("--c1", bi.c1, "Constant c1")->capture_default_str();
  bounds->add_option("--c2", bi.c2, "Constant c2")->capture_default_str();
  bounds->add_flag("--tsv", bo_tsv, "Tab-separated output");
  bo_schema.add(bounds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*train) {
      train_cfg.include_diagonal = !no_diagonal;
      train_cfg.schema = train_schema.schema();
      const auto [result, data] = run_train(train_cfg);
      print_train_summary(result.diagnostics);
    } else if (*recommend) {
      if (rec_model.empty() && rec_plsi.empty()) {
        std::cerr << "recommend: one of --model or --plsi-model is required\n";
        return kUsageError;
      }
      const Dataset data = load_triplets_file(rec_train, rec_schema.schema());
      const auto scorer = load_scorer(rec_model, rec_plsi);
      check_dims(*scorer, data);
      std::vector<Index> users;
      if (rec_users_file.empty()) {
        for (Index u = 0; u < data.users.size(); ++u) users.push_back(u);
      } else {
        auto in = open_in(rec_users_file);
        std::string line;
        while (std::getline(in, line)) {
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.empty()) continue;
          const auto u = data.users.find(line);
          if (!u) throw Error(ErrorKind::kUnknownUser, "user '" + line + "' is not in the training data");
          users.push_back(*u);
        }
      }
      std::string out;
      for (Index u : users) {
        const auto history = data.matrix.row(u);
        const auto top = rank_items(scorer->scores(u, history), history, rec_tau, !rec_include_seen);
        for (std::size_t r = 0; r < top.size(); ++r) {
          out += data.users.key(u);
          out += '\t';
          out += data.items.key(top[r]);
          out += '\t';
          out += std::to_string(r + 1);
          out += '\n';
        }
      }
      std::cout << out;
    } else if (*eval) {
      if (ev_model.empty() && ev_plsi.empty() && !ev_random) {
        std::cerr << "eval: one of --model, --plsi-model or --random is required\n";
        return kUsageError;
      }
      const Dataset data = load_triplets_file(ev_train, ev_schema.schema());
      auto test_in = open_in(ev_test);
      const auto test = load_aligned_triplets(test_in, data.users, data.items, ev_schema.schema());
      std::unique_ptr<Scorer> scorer;
      if (!ev_random) {
        scorer = load_scorer(ev_model, ev_plsi);
        check_dims(*scorer, data);
      }
      const Index tau_max = ev_tau.empty() ? 0 : *std::max_element(ev_tau.begin(), ev_tau.end());
      std::vector<std::vector<ItemId>> recs(test.rows.size());
      for (Index u = 0; u < static_cast<Index>(recs.size()); ++u) {
        if (test.rows[static_cast<std::size_t>(u)].empty()) continue;
        const auto history = data.matrix.row(u);
        recs[static_cast<std::size_t>(u)] =
            ev_random ? random_ranking(data.matrix.n_items(), history, tau_max, ev_seed,
                                       static_cast<std::uint64_t>(u))
                      : rank_items(scorer->scores(u, history), history, tau_max, true);
      }
      const auto metrics = ranking_metrics(recs, test.rows, ev_tau);
      std::cerr << "users evaluated " << metrics.n_users_evaluated << "  skipped (empty test) "
                << metrics.n_users_skipped << "  dropped test records: unknown user "
                << test.dropped_unknown_user << ", unknown item " << test.dropped_unknown_item
                << '\n';
      if (ev_output.empty()) {
        write_metrics_report(std::cout, metrics);
      } else {
        auto out = open_out(ev_output);
        write_metrics_report(out, metrics);
      }
    } else if (*synth) {
      PlantedModel p = sy_separable ? separable_planted(sy_k, sy_d, sy_seed)
                                    : random_planted(sy_k, sy_d, sy_seed, sy_concentration);
      p.min_items = sy_min;
      p.max_items = sy_max;
      const auto x = sample_dataset(p, sy_n, sy_seed);
      auto out = open_out(sy_output);
      write_triplets(out, x);
      if (!sy_truth.empty()) save_model(sy_truth, p.as_model());
      std::cerr << "users " << x.n_users() << "  items " << x.n_items() << "  nnz " << x.nnz()
                << '\n';
    } else if (*plsi) {
      const Dataset data = load_triplets_file(pl_input, pl_schema.schema());
      const auto m = plsi_train(data.matrix, plsi_opts);
      save_plsi(pl_output, m);
      if (!pl_trace.empty()) {
        auto out = open_out(pl_trace);
        out << "iteration\tloglik\n";
        for (std::size_t i = 0; i < m.loglik_trace.size(); ++i) {
          out << i << '\t' << std::setprecision(17) << m.loglik_trace[i] << '\n';
        }
      }
      std::cerr << "EM iterations " << m.iterations << "  stopped by rule "
                << (m.stopped_by_rule ? "yes" : "no") << "  final loglik "
                << m.loglik_trace.back() << '\n';
    } else if (*bounds) {
      std::optional<MomModel> model;
      if (!bo_model.empty()) model = load_model(bo_model);
      if (model) {
        if (!*bo_k) bi.k = model->k();
        if (!*bo_pimax) bi.pi_max = model->pi.maxCoeff();
        if (!*bo_pimin) bi.pi_min = model->pi.minCoeff();
      }
      if (!bo_input.empty()) {
        const Dataset data = load_triplets_file(bo_input, bo_schema.schema());
        const DatasetStats stats = compute_stats(data.matrix);
        if (!*bo_n) bi.n = stats.n_users;
        if (!*bo_d2s) bi.d2s = stats.d2s;
        if (!*bo_d3s) bi.d3s = stats.d3s;
        if (!*bo_sigma1 || !*bo_sigmak) {
          if (bi.k < 1) {
            std::cerr << "bounds: --k or --model is needed to read the spectrum\n";
            return kUsageError;
          }
          const auto eig = topk_eig(estimate_m2(data.matrix), bi.k);
          if (!*bo_sigma1) bi.sigma1 = eig.values(0);
          if (!*bo_sigmak) bi.sigmaK = eig.values(bi.k - 1);
        }
      }
      const auto report = compute_bounds(bi);
      write_bound_report(std::cout, bi, report, bo_tsv);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == ErrorKind::kInvalidArgument ? kUsageError : kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
