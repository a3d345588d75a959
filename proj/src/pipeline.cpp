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


#include "speccf/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>

#include <json.hpp>

#include "speccf/error.hpp"

namespace speccf {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  explicit StageTimer(TrainDiagnostics& d) : diag_(d), last_(Clock::now()) {}

  template <typename Fn>
  auto run(const char* stage, Fn&& fn) {
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        lap(stage);
      } else {
        auto out = fn();
        lap(stage);
        return out;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(stage) + ": " + e.what(), e.detail());
    }
  }

 private:
  void lap(const char* stage) {
    const auto now = Clock::now();
    diag_.stage_seconds.emplace_back(stage, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

  TrainDiagnostics& diag_;
  Clock::time_point last_;
};

void check_config(const TrainConfig& cfg) {
  if (cfg.k < 1) throw Error(ErrorKind::kInvalidArgument, "k must be >= 1");
}

void fit_stages(TrainResult& r, const WhitenedMomentFn& m3_of_w, const TrainConfig& cfg,
                StageTimer& timer) {
  auto& d = r.diagnostics;
  const auto eig = timer.run("topk_eig", [&] {
    EigOptions opts;
    opts.tol = cfg.eig_tol;
    opts.max_iter = cfg.eig_max_iter;
    opts.seed = cfg.seed;
    return topk_symmetric_eigs(r.m2.entries, cfg.k, opts);
  });
  d.spectrum = eig.values;
  d.residuals = eig.residuals;
  d.eig_restarts = eig.restarts;
  d.eig_matvecs = eig.matvecs;

  r.whitener = timer.run("build_whitener", [&] { return build_whitener(eig); });
  std::tie(d.whitening_error, d.pinv_error) = whitening_errors(r.m2, r.whitener);

  r.m3 = timer.run("estimate_whitened_m3", [&] { return m3_of_w(r.whitener.w); });

  r.pairs = timer.run("robust_decompose", [&] {
    PowerMethodOptions opts;
    opts.restarts = cfg.restarts;
    opts.iters = cfg.iters;
    opts.seed = cfg.seed;
    return robust_decompose(r.m3, cfg.k, opts);
  });
  d.lambdas.resize(cfg.k);
  for (Index c = 0; c < cfg.k; ++c) d.lambdas(c) = r.pairs[static_cast<std::size_t>(c)].lambda;

  RecoveryDiagnostics rd;
  r.model = timer.run("recover_parameters",
                      [&] { return recover_parameters(r.whitener, r.pairs, &rd); });
  d.lambda_mass_deviation = rd.lambda_mass_deviation;
  d.clipped_entries = rd.clipped_entries;
  d.mom_parameters = r.model.effective_parameters();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::pair<double, double> whitening_errors(const PairwiseMoment& m2,
                                           const WhiteningTransform& wt) {
  const Index k = wt.k();
  const Eigen::MatrixXd mw = m2.entries * wt.w;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
  const double white = (wt.w.transpose() * mw - eye).cwiseAbs().maxCoeff();
  const double pinv = (wt.w_pinv.transpose() * wt.w - eye).cwiseAbs().maxCoeff();
  return {white, pinv};
}

TrainResult fit_from_moments(PairwiseMoment m2, const WhitenedMomentFn& m3_of_w,
                             const TrainConfig& cfg) {
  check_config(cfg);
  const auto t0 = Clock::now();
  TrainResult r;
  r.m2 = std::move(m2);
  r.diagnostics.n_items = r.m2.dim;
  StageTimer timer(r.diagnostics);
  fit_stages(r, m3_of_w, cfg, timer);
  r.diagnostics.total_seconds = seconds_since(t0);
  return r;
}

TrainResult train_model(const InteractionMatrix& x, const TrainConfig& cfg) {
  check_config(cfg);
  const auto t0 = Clock::now();
  TrainResult r;
  auto& d = r.diagnostics;
  x.reset_pass_count();
  d.n_users = x.n_users();
  d.n_items = x.n_items();
  d.nnz = x.nnz();
  StageTimer timer(d);
  r.m2 = timer.run("estimate_m2", [&] { return estimate_m2(x, cfg.include_diagonal); });
  fit_stages(r, [&](const Eigen::MatrixXd& w) { return estimate_whitened_m3(x, w); }, cfg,
             timer);
  r.posteriors = timer.run("compute_posteriors", [&] { return compute_posteriors(x, r.model); });
  d.passes = x.pass_count();
  d.plsi_parameters = (d.n_items - 1) * cfg.k + d.n_users * (cfg.k - 1);
  d.total_seconds = seconds_since(t0);
  return r;
}

std::pair<TrainResult, Dataset> run_train(const TrainConfig& cfg) {
  check_config(cfg);
  if (cfg.input.empty()) throw Error(ErrorKind::kInvalidArgument, "input path is empty");
  if (cfg.output.empty()) throw Error(ErrorKind::kInvalidArgument, "output path is empty");
  const auto t0 = Clock::now();
  Dataset data;
  try {
    data = load_triplets_file(cfg.input, cfg.schema);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("load: ") + e.what(), e.detail());
  }
  const double load_seconds = seconds_since(t0);
  TrainResult r = train_model(data.matrix, cfg);
  auto& d = r.diagnostics;
  d.stage_seconds.insert(d.stage_seconds.begin(), {"load", load_seconds});

  const auto t_write = Clock::now();
  try {
    save_model(cfg.output, r.model);
    if (!cfg.posteriors_output.empty()) {
      std::ofstream out(cfg.posteriors_output, std::ios::binary);
      if (!out) throw Error(ErrorKind::kIo, "cannot write " + cfg.posteriors_output);
      write_posteriors(out, r.posteriors, &data.users);
    }
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("write: ") + e.what(), e.detail());
  }
  d.stage_seconds.emplace_back("write", seconds_since(t_write));
  d.total_seconds = seconds_since(t0);
  if (!cfg.diagnostics_output.empty()) {
    std::ofstream out(cfg.diagnostics_output, std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "write: cannot write " + cfg.diagnostics_output);
    write_diagnostics_json(out, d);
  }
  return {std::move(r), std::move(data)};
}

void write_diagnostics_json(std::ostream& out, const TrainDiagnostics& d) {
  const auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::ordered_json j;
  j["passes"] = d.passes;
  j["n_users"] = d.n_users;
  j["n_items"] = d.n_items;
  j["nnz"] = d.nnz;
  j["spectrum"] = vec(d.spectrum);
  j["eig_residuals"] = vec(d.residuals);
  j["eig_restarts"] = d.eig_restarts;
  j["eig_matvecs"] = d.eig_matvecs;
  j["lambdas"] = vec(d.lambdas);
  j["lambda_mass_deviation"] = d.lambda_mass_deviation;
  j["whitening_error"] = d.whitening_error;
  j["pinv_error"] = d.pinv_error;
  j["clipped_entries"] = d.clipped_entries;
  j["mom_parameters"] = d.mom_parameters;
  j["plsi_parameters"] = d.plsi_parameters;
  nlohmann::ordered_json stages = nlohmann::ordered_json::object();
  for (const auto& [name, secs] : d.stage_seconds) stages[name] = secs;
  j["stage_seconds"] = stages;
  j["total_seconds"] = d.total_seconds;
  out << j.dump(2) << '\n';
}

}  // namespace speccf
