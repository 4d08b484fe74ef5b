// Acceptance gate: one pass/fail line per shipping criterion, nonzero exit
// when any fails. Runs the same canned experiment protocols as the CLI
// `repro` commands (base seed 1, five seeds where a criterion is statistical).
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bundlesight/baselines.hpp"
#include "bundlesight/datagen.hpp"
#include "bundlesight/em.hpp"
#include "bundlesight/em_censored.hpp"
#include "bundlesight/em_gmm.hpp"
#include "bundlesight/experiments.hpp"
#include "bundlesight/metrics.hpp"
#include "bundlesight/polyhedron.hpp"
#include "bundlesight/rng.hpp"
#include "bundlesight/sampler.hpp"
#include "bundlesight/theory_lab.hpp"
#include "bundlesight/types.hpp"
#include "oracles.hpp"

using namespace bundlesight;

namespace {

constexpr std::uint64_t kBaseSeed = 1;
constexpr int kSeedCount = 5;

struct Verdict {
  bool pass = false;
  std::string details;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// --- criterion 1: six-product recovery ---------------------------------------

Verdict criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const auto result = experiments::run_figure1(kBaseSeed);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  double best = result.truth_errors.front();
  int best_iter = 0;
  for (std::size_t t = 0; t < result.truth_errors.size(); ++t) {
    if (result.truth_errors[t] < best) {
      best = result.truth_errors[t];
      best_iter = static_cast<int>(t);
    }
  }
  Verdict v;
  v.pass = best < 0.1 && result.fit.iterations <= 20 && wall <= 600.0 &&
           result.distinct_bundles >= 20 && result.distinct_bundles <= 60;
  std::ostringstream os;
  os << "error " << fmt(best) << " at iteration " << best_iter << " (limit "
     << "0.1 within 20), " << result.distinct_bundles << " distinct bundles, "
     << fmt(wall) << "s wall";
  v.details = os.str();
  return v;
}

// --- criterion 2: sample-size monotonicity -----------------------------------

Verdict criterion2() {
  std::vector<std::vector<double>> by_size(3);
  for (int s = 0; s < kSeedCount; ++s) {
    const auto r = experiments::run_consistency(kBaseSeed + s);
    for (int k = 0; k < 3; ++k) by_size[k].push_back(r.errors[k]);
  }
  std::vector<double> med(3), se(3);
  for (int k = 0; k < 3; ++k) {
    med[k] = median(by_size[k]);
    se[k] = sample_sd(by_size[k]) / std::sqrt(double(kSeedCount));
  }
  int inversions = 0;
  int intolerable = 0;
  for (int k = 0; k < 2; ++k) {
    if (med[k + 1] < med[k]) continue;
    ++inversions;
    const double tol = std::sqrt(se[k] * se[k] + se[k + 1] * se[k + 1]);
    if (med[k + 1] - med[k] > tol) ++intolerable;
  }
  Verdict v;
  v.pass = inversions <= 1 && intolerable == 0;
  std::ostringstream os;
  os << "median error " << fmt(med[0]) << " -> " << fmt(med[1]) << " -> "
     << fmt(med[2]) << " for N=1000/2000/4000 (se " << fmt(se[0]) << "/"
     << fmt(se[1]) << "/" << fmt(se[2]) << "), " << inversions
     << " inversion(s), " << intolerable << " beyond 1 se";
  v.details = os.str();
  return v;
}

// --- criterion 3: EM beats MNL out of sample ---------------------------------

Verdict criterion3() {
  Verdict v;
  v.pass = true;
  std::ostringstream os;
  for (const TruthKind kind : {TruthKind::kGaussian, TruthKind::kGumbel}) {
    int wins = 0;
    std::vector<double> em, mnl;
    for (int s = 0; s < kSeedCount; ++s) {
      const auto r = experiments::run_figure2(kind, kBaseSeed + s);
      wins += r.em_rmse < r.mnl_rmse;
      em.push_back(r.em_rmse);
      mnl.push_back(r.mnl_rmse);
    }
    v.pass = v.pass && wins >= 4;
    os << (kind == TruthKind::kGaussian ? "gaussian" : "gumbel") << " truth: "
       << wins << "/5 wins (median rmse " << fmt(median(em)) << " em vs "
       << fmt(median(mnl)) << " mnl); ";
  }
  v.details = os.str();
  return v;
}

// --- criterion 4: censored fit tracks the complete fit -----------------------

Verdict criterion4() {
  std::vector<double> gaps, rates;
  for (int s = 0; s < kSeedCount; ++s) {
    const auto r = experiments::run_censored_comparison(kBaseSeed + s);
    gaps.push_back(std::abs(r.censored_rmse - r.full_rmse));
    rates.push_back(r.censor_rate);
  }
  const double med_gap = median(gaps);
  const double med_rate = median(rates);
  Verdict v;
  v.pass = med_gap <= 0.004 && med_rate >= 0.05 && med_rate <= 0.15;
  std::ostringstream os;
  os << "median |rmse gap| " << fmt(med_gap) << " (limit 0.004), censoring "
     << fmt(100 * med_rate) << "% (target 5-15%)";
  v.details = os.str();
  return v;
}

// --- criterion 5: EM vs Metropolis-Hastings ----------------------------------

Verdict criterion5() {
  int wins = 0;
  double max_em_seconds = 0.0;
  std::vector<double> em, mh;
  for (int s = 0; s < kSeedCount; ++s) {
    const auto r = experiments::run_mh_comparison(kBaseSeed + s);
    wins += r.em_error < r.mh_error;
    max_em_seconds = std::max(max_em_seconds, r.em_runtime_seconds);
    em.push_back(r.em_error);
    mh.push_back(r.mh_error);
  }
  Verdict v;
  v.pass = wins >= 4 && max_em_seconds < 300.0;
  std::ostringstream os;
  os << wins << "/5 wins (median error " << fmt(median(em)) << " em vs "
     << fmt(median(mh)) << " mh), max em fit " << fmt(max_em_seconds) << "s";
  v.details = os.str();
  return v;
}

// --- criterion 6: separation eigenvalue --------------------------------------

GaussianParams standard_normal_1d() {
  GaussianParams p;
  p.mu = Eigen::VectorXd::Zero(1);
  p.sigma = Eigen::MatrixXd::Identity(1, 1);
  return p;
}

Verdict criterion6() {
  const GaussianParams truth = standard_normal_1d();
  const auto split =
      lab::axis_split_partition(Eigen::VectorXd::Zero(1));
  const auto split_result =
      lab::assumption1_eigenvalue(truth, split, 500000, kBaseSeed);

  lab::PartitionSpec whole;
  whole.regions.push_back(Polyhedron::whole_space(1));
  const auto whole_result =
      lab::assumption1_eigenvalue(truth, whole, 500000, kBaseSeed);

  const double target = 2.0 / M_PI;
  Verdict v;
  v.pass = std::abs(split_result.lambda_min - target) <= 0.02 &&
           whole_result.lambda_min <= 0.01;
  std::ostringstream os;
  os << "split-at-0 lambda_min " << fmt(split_result.lambda_min)
     << " (target 2/pi = " << fmt(target) << " +/- 0.02), whole-space "
     << fmt(whole_result.lambda_min) << " (limit 0.01)";
  v.details = os.str();
  return v;
}

// --- criterion 7: population-EM contraction ----------------------------------

Verdict criterion7() {
  const GaussianParams truth = standard_normal_1d();
  const auto split =
      lab::axis_split_partition(Eigen::VectorXd::Zero(1));
  const auto r =
      lab::contraction_experiment(truth, split, 0.2, 10, 500000, kBaseSeed);

  bool decreasing = true;
  for (std::size_t t = 0; t + 1 < r.errors.size(); ++t)
    decreasing = decreasing && r.errors[t + 1] < r.errors[t];

  double worst_ratio = 0.0;
  for (double ratio : r.ratios) worst_ratio = std::max(worst_ratio, ratio);

  // Each realized step against the exact quadrature map.
  double worst_oracle_gap = 0.0;
  for (std::size_t t = 0; t + 1 < r.trajectory.size(); ++t) {
    const double want = oracle::population_map_1d(r.trajectory[t](0), 0.0, 1.0);
    worst_oracle_gap =
        std::max(worst_oracle_gap, std::abs(r.trajectory[t + 1](0) - want));
  }
  const auto direct = lab::population_em_step(
      Eigen::VectorXd::Constant(1, 0.2), truth, split, 500000, kBaseSeed);
  worst_oracle_gap = std::max(
      worst_oracle_gap,
      std::abs(direct.mu_next(0) - oracle::population_map_1d(0.2, 0.0, 1.0)));

  Verdict v;
  v.pass = decreasing && worst_ratio <= r.bound + 0.05 &&
           worst_oracle_gap <= 0.01;
  std::ostringstream os;
  os << "10 strictly decreasing steps: " << (decreasing ? "yes" : "NO")
     << ", worst ratio " << fmt(worst_ratio) << " (limit "
     << fmt(r.bound + 0.05) << " from epsilon_hat " << fmt(r.epsilon_hat)
     << "), worst oracle gap " << fmt(worst_oracle_gap) << " (limit 0.01)";
  v.details = os.str();
  return v;
}

// --- criterion 8: property suites --------------------------------------------

std::string check_partition_properties() {
  PriceMenu menu;
  menu.entries.push_back({Bundle::single(0, 3), 1.0});
  menu.entries.push_back({Bundle::single(1, 3), 0.5});
  menu.entries.push_back({Bundle::single(2, 3), 2.0});
  menu.entries.push_back({Bundle::from_bitstring("110"), 1.2});
  menu.entries.push_back({Bundle::from_bitstring("111"), 3.0});
  const auto regions = build_choice_partition(menu, 3);

  std::vector<oracle::MenuRow> rows;
  for (const auto& e : menu.entries) {
    oracle::MenuRow row;
    for (int i = 0; i < 3; ++i)
      if (e.bundle.contains(i)) row.products.push_back(i);
    row.price = e.price;
    rows.push_back(row);
  }

  RngStream rng(808);
  Eigen::VectorXd v(3);
  for (int probe = 0; probe < 10000; ++probe) {
    for (int i = 0; i < 3; ++i) v(i) = 3.0 * rng.normal();
    const int want = oracle::best_choice(rows, v);
    if (!contains(regions[want], v))
      return "partition: oracle region does not contain its probe";
    for (std::size_t k = 0; k < regions.size(); ++k)
      if (static_cast<int>(k) != want && contains_strict(regions[k], v))
        return "partition: probe strictly inside a second region";
  }
  return "";
}

std::string check_sampler_moments() {
  GaussianParams std1 = standard_normal_1d();
  Polyhedron upper = Polyhedron::whole_space(1);
  upper.add_halfspace(-Eigen::VectorXd::Ones(1), 0.0);  // -v <= 0
  const auto half = sample_truncated_rejection(upper, std1, 40000, 11);
  const double half_mean = half.weighted_mean()(0);
  if (std::abs(half_mean - std::sqrt(2.0 / M_PI)) > 0.02)
    return "sampler: half-normal mean " + fmt(half_mean);

  Polyhedron above1 = Polyhedron::whole_space(1);
  above1.add_halfspace(-Eigen::VectorXd::Ones(1), -1.0);  // v >= 1
  const auto mills = sample_truncated_rejection(above1, std1, 40000, 12);
  const double mills_mean = mills.weighted_mean()(0);
  if (std::abs(mills_mean - oracle::truncated_mean_above(0, 1, 1)) > 0.02)
    return "sampler: inverse-Mills mean " + fmt(mills_mean);

  GaussianParams corr;
  corr.mu = Eigen::VectorXd::Zero(2);
  corr.sigma = Eigen::MatrixXd(2, 2);
  corr.sigma << 1.0, 0.5, 0.5, 1.0;
  Polyhedron orthant = Polyhedron::whole_space(2);
  orthant.add_halfspace(-Eigen::Vector2d(1, 0), 0.0);
  orthant.add_halfspace(-Eigen::Vector2d(0, 1), 0.0);
  const int draws = 400000;
  const double p = region_probability(orthant, corr, draws, 13);
  const double want = 0.25 + std::asin(0.5) / (2.0 * M_PI);
  const double se = std::sqrt(want * (1 - want) / draws);
  if (std::abs(p - want) > 4 * se + 1e-12)
    return "sampler: orthant probability " + fmt(p) + " vs " + fmt(want);
  return "";
}

std::string check_negbin_pmf() {
  for (const double p0 : {0.2, 0.5, 0.8})
    for (long k : {1L, 4L})
      for (long n = k; n < k + 12; ++n) {
        const double got = censored_posterior_pmf(n, k, p0);
        const double want = oracle::negbin_posterior_pmf(n, k, p0);
        if (std::abs(got - want) > 1e-12 * std::max(1.0, want))
          return "negbin: pmf(" + std::to_string(n) + "," + std::to_string(k) +
                 "," + fmt(p0) + ") = " + fmt(got) + " vs " + fmt(want);
      }
  RngStream rng(14);
  const int reps = 60000;
  std::vector<long> hist(16, 0);
  for (int i = 0; i < reps; ++i) {
    const long total = sample_negative_binomial_total(1, 0.5, rng);
    if (total < 16) ++hist[total];
  }
  for (long n = 1; n <= 6; ++n) {
    const double freq = hist[n] / double(reps);
    const double want = oracle::negbin_posterior_pmf(n, 1, 0.5);
    const double se = std::sqrt(want * (1 - want) / reps);
    if (std::abs(freq - want) > 4 * se + 1e-9)
      return "negbin: sampled freq(" + std::to_string(n) + ") = " + fmt(freq);
  }
  return "";
}

std::string check_m_step_formulas() {
  RngStream rng(15);
  std::vector<SampleBatch> batches;
  for (int t = 0; t < 5; ++t) {
    SampleBatch b;
    b.points.resize(8, 2);
    for (int l = 0; l < 8; ++l)
      for (int i = 0; i < 2; ++i) b.points(l, i) = rng.uniform(-2.0, 2.0);
    Eigen::VectorXd w(8);
    for (int l = 0; l < 8; ++l) w(l) = rng.uniform(0.1, 1.0);
    b.weights = w / w.sum();
    batches.push_back(b);
  }
  const GaussianParams got = m_step(batches);

  // Pooled moment formulas: every batch carries unit mass.
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  for (const auto& b : batches)
    for (int l = 0; l < 8; ++l)
      mu += b.weights(l) * b.points.row(l).transpose();
  mu /= double(batches.size());
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2, 2);
  for (const auto& b : batches)
    for (int l = 0; l < 8; ++l) {
      const Eigen::VectorXd dev = b.points.row(l).transpose() - mu;
      sigma += b.weights(l) * dev * dev.transpose();
    }
  sigma /= double(batches.size());

  if ((got.mu - mu).cwiseAbs().maxCoeff() > 1e-10)
    return "m_step: mean deviates from the pooled moment formula";
  if ((got.sigma - sigma).cwiseAbs().maxCoeff() > 1e-10)
    return "m_step: covariance deviates from the pooled moment formula";
  return "";
}

std::string check_gmm_responsibilities() {
  GenSpec spec;
  spec.product_count = 2;
  spec.n_transactions = 50;
  spec.seed = 16;
  const Dataset data = generate_dataset(spec).dataset;

  GmmParams params;
  GmmComponent a, b;
  a.weight = 0.4;
  a.params = default_init(data);
  b.weight = 0.6;
  b.params = a.params;
  b.params.mu.array() += 1.0;
  params.components = {a, b};

  EmConfig config;
  config.pool_size = 20000;
  config.seed = 17;
  const Eigen::MatrixXd r = responsibilities(data, params, config, 0);
  if (r.rows() != 50 || r.cols() != 2) return "gmm: responsibility shape";
  for (int n = 0; n < r.rows(); ++n) {
    if (std::abs(r.row(n).sum() - 1.0) > 1e-9)
      return "gmm: responsibility row does not sum to 1";
    if ((r.row(n).array() < -1e-15).any())
      return "gmm: negative responsibility";
  }
  return "";
}

std::string check_total_variance() {
  GaussianParams truth;
  truth.mu = Eigen::VectorXd::Constant(1, 0.3);
  truth.sigma = Eigen::MatrixXd::Identity(1, 1) * 1.69;
  Polyhedron lower = Polyhedron::whole_space(1);
  lower.add_halfspace(Eigen::VectorXd::Ones(1), 0.0);
  Polyhedron upper = Polyhedron::whole_space(1);
  upper.add_halfspace(-Eigen::VectorXd::Ones(1), 0.0);

  const int reps = 8, draws = 50000;
  std::vector<double> totals;
  for (int rep = 0; rep < reps; ++rep) {
    const auto pool = sample_mvn(truth, draws, 900 + rep);
    double n_lo = 0, sum_lo = 0, sq_lo = 0, sum_hi = 0, sq_hi = 0;
    for (int i = 0; i < draws; ++i) {
      const double x = pool(i, 0);
      if (x <= 0) {
        ++n_lo;
        sum_lo += x;
        sq_lo += x * x;
      } else {
        sum_hi += x;
        sq_hi += x * x;
      }
    }
    const double n_hi = draws - n_lo;
    const double m_lo = sum_lo / n_lo, m_hi = sum_hi / n_hi;
    const double v_lo = sq_lo / n_lo - m_lo * m_lo;
    const double v_hi = sq_hi / n_hi - m_hi * m_hi;
    const double w_lo = n_lo / double(draws), w_hi = n_hi / double(draws);
    const double overall = w_lo * m_lo + w_hi * m_hi;
    const double within = w_lo * v_lo + w_hi * v_hi;
    const double between = w_lo * (m_lo - overall) * (m_lo - overall) +
                           w_hi * (m_hi - overall) * (m_hi - overall);
    totals.push_back(within + between);
  }
  double mean = 0;
  for (double t : totals) mean += t;
  mean /= reps;
  const double se = sample_sd(totals) / std::sqrt(double(reps));
  if (std::abs(mean - 1.69) > 3 * se + 1e-9)
    return "total variance: " + fmt(mean) + " vs 1.69 (se " + fmt(se) + ")";
  return "";
}

std::string check_byte_determinism() {
  GenSpec spec;
  spec.product_count = 3;
  spec.n_transactions = 120;
  spec.seed = 18;
  const Dataset data = generate_dataset(spec).dataset;

  EmConfig config;
  config.mc_samples = 60;
  config.pool_size = 20000;
  config.max_iterations = 4;
  config.tolerance = 1e-12;
  config.seed = 19;

  FitReport first;
  for (const int workers : {1, 2, 5}) {
    EmConfig c = config;
    c.workers = workers;
    const FitReport r = fit(data, c);
    if (workers == 1) {
      first = r;
      continue;
    }
    if (std::memcmp(first.params.mu.data(), r.params.mu.data(),
                    sizeof(double) * 3) != 0 ||
        std::memcmp(first.params.sigma.data(), r.params.sigma.data(),
                    sizeof(double) * 9) != 0)
      return "determinism: parameters differ at " + std::to_string(workers) +
             " workers";
    if (first.error_trace != r.error_trace)
      return "determinism: error trace differs at " +
             std::to_string(workers) + " workers";
  }
  const FitReport again = fit(data, config);
  if (std::memcmp(first.params.sigma.data(), again.params.sigma.data(),
                  sizeof(double) * 9) != 0)
    return "determinism: repeated fit differs";
  return "";
}

Verdict criterion8() {
  const std::vector<std::pair<std::string, std::function<std::string()>>>
      groups = {
          {"partition", check_partition_properties},
          {"sampler moments", check_sampler_moments},
          {"negative binomial", check_negbin_pmf},
          {"m-step", check_m_step_formulas},
          {"gmm responsibilities", check_gmm_responsibilities},
          {"total variance", check_total_variance},
          {"byte determinism", check_byte_determinism},
      };
  Verdict v;
  v.pass = true;
  std::string failures;
  for (const auto& [name, run] : groups) {
    const std::string err = run();
    if (!err.empty()) {
      v.pass = false;
      failures += (failures.empty() ? "" : "; ") + err;
    }
  }
  v.details = v.pass ? std::to_string(groups.size()) + " property groups hold"
                     : failures;
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>>
      criteria = {
          {"base EM recovery", criterion1},
          {"sample-size monotonicity", criterion2},
          {"EM beats MNL out of sample", criterion3},
          {"censored fit tracks complete fit", criterion4},
          {"EM beats MH at a 10k budget", criterion5},
          {"separation eigenvalue", criterion6},
          {"population-EM contraction", criterion7},
          {"property suites", criterion8},
      };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.details = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s criterion %zu: %s (%s) [%.1fs]\n",
                v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.details.c_str(), seconds);
    std::fflush(stdout);
    failed += !v.pass;
  }
  if (failed == 0)
    std::printf("all %zu criteria pass\n", criteria.size());
  else
    std::printf("%d of %zu criteria FAILED\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
