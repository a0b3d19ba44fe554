//------------------------------------------------------------------------------
//
//   Copyright 2026 The datamarket Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "datamarket/experiments.hpp"

#include "datamarket/csv.hpp"
#include "datamarket/errors.hpp"
#include "datamarket/oracle.hpp"
#include "datamarket/random.hpp"
#include "datamarket/valuation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace datamarket {

MarketParams market_params(MarketConfig const &config, std::size_t num_devices)
{
  MarketParams p;
  p.total_budget = config.scenario.kind == "market" && config.scenario.price_per_device > 0.0
                       ? config.scenario.price_per_device * static_cast<double>(num_devices)
                       : config.total_budget;
  p.comm_rounds                      = config.comm_rounds;
  p.unit_comm_cost                   = config.unit_comm_cost;
  p.constraints.rho_max              = config.rho_max;
  p.constraints.coalition_cost_bound = config.coalition_cost_bound;
  if (std::isfinite(config.phi_threshold))
  {
    p.constraints.phi_thresholds.assign(num_devices, config.phi_threshold);
  }
  return p;
}

MarketInstance build_market(MarketConfig const &config, std::uint64_t seed)
{
  config.validate();
  auto const &sc = config.scenario;
  if (sc.kind != "market")
  {
    throw ConfigError("build_market needs scenario.kind = market");
  }
  auto const M   = sc.groups * sc.devices_per_group;
  Rng        rng = make_rng(seed, 1);

  MarketInstance out;
  out.group.resize(M);
  CorrelationSpec spec;
  spec.num_devices = M;
  spec.mean_vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
  spec.covariance  = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  spec.feature_dim = config.d;
  spec.label_noise = sc.label_noise;
  std::uniform_int_distribution<std::size_t> count{sc.samples_min, sc.samples_max};
  for (std::size_t m = 0; m < M; ++m)
  {
    out.group[m] = m / sc.devices_per_group;
    spec.samples_per_device.push_back(count(rng));
  }
  for (std::size_t i = 0; i < M; ++i)
  {
    for (std::size_t j = 0; j < M; ++j)
    {
      if (i == j)
      {
        continue;
      }
      auto const gap = out.group[i] > out.group[j] ? out.group[i] - out.group[j] : out.group[j] - out.group[i];
      spec.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          sc.intra_correlation * std::pow(sc.cross_decay, static_cast<double>(gap));
    }
  }
  out.datasets = generate_correlated_profiles(spec, derive_seed(seed, 2));

  std::vector<std::vector<double>> streams;
  for (auto const &ds : out.datasets)
  {
    streams.push_back(feature_mean_stream(ds));
  }
  out.leakage = sequential_correlation_estimate(streams, config.correlation_tol);

  CorrelationSpec ref;
  ref.num_devices        = 1;
  ref.mean_vector        = Eigen::VectorXd::Zero(1);
  ref.covariance         = Eigen::MatrixXd::Identity(1, 1);
  ref.samples_per_device = {config.learner.reference_samples};
  ref.feature_dim        = config.d;
  ref.label_noise        = sc.label_noise;
  auto const reference   = generate_correlated_profiles(ref, derive_seed(seed, 3));
  auto const baseline    = train(out.datasets, 0, config.learner.learning_rate, derive_seed(seed, 4));

  std::vector<double> theta(M);
  for (std::size_t m = 0; m < M; ++m)
  {
    auto const J = performance_potential(out.datasets[m], baseline, reference,
                                         config.learner.learning_rate);
    theta[m]     = average_marginal_contribution(out.datasets[m].size(), config.learner.batch,
                                                 config.learner.draws, derive_seed(seed, 1000 + m), J)
                   .mean;
  }
  double const top = *std::max_element(theta.begin(), theta.end());
  for (auto &t : theta)
  {
    t = top > 0.0 ? std::clamp(t / top, 0.0, 1.0) : 0.0;
  }

  out.model      = train(out.datasets, config.learner.train_steps, config.learner.learning_rate,
                         derive_seed(seed, 5));
  auto const rho = gradient_dissimilarity(out.model, out.datasets);

  for (std::size_t m = 0; m < M; ++m)
  {
    auto const [lo, hi] = sc.xi_bands[out.group[m]];
    std::uniform_real_distribution<double> band{lo, hi};
    DeviceProfile                          d;
    d.id         = m;
    d.n_samples  = out.datasets[m].size();
    d.sample_ids = out.datasets[m].sample_ids;
    d.dtype      = data_type(theta[m], band(rng), config.K);
    d.rho        = rho[m];
    out.devices.push_back(std::move(d));
  }
  out.params = market_params(config, M);
  return out;
}

void MetricsReport::set_payoff(std::vector<double> p, double normalizer)
{
  payoff         = std::move(p);
  average_payoff = payoff.empty() ? 0.0
                                  : std::accumulate(payoff.begin(), payoff.end(), 0.0) /
                                        static_cast<double>(payoff.size());
  scale              = normalizer > 0.0 ? normalizer : 1.0;
  normalized_average = average_payoff / scale;
}

LeakageSummary summarize(LeakageMatrix const &leakage)
{
  LeakageSummary s;
  auto const     n     = leakage.size();
  double         pairs = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = i + 1; j < n; ++j)
    {
      auto const a = static_cast<Eigen::Index>(i);
      auto const b = static_cast<Eigen::Index>(j);
      s.mean_abs_r += std::abs(leakage.r(a, b));
      s.mean_g += leakage.g_influence(a, b);
      pairs += 1.0;
      auto const r = leakage.rounds_to_converge[i][j];
      if (r == kNotConverged)
      {
        ++s.unconverged_pairs;
      }
      else
      {
        s.max_rounds = std::max(s.max_rounds, r);
      }
    }
  }
  if (pairs > 0.0)
  {
    s.mean_abs_r /= pairs;
    s.mean_g /= pairs;
  }
  return s;
}

MetricsReport baseline_noncooperative(MarketInstance const &market, MarketConfig const &config)
{
  double const delta = config.delta;
  auto const          N = market.devices.size();
  double              total_n = 0.0;
  for (auto const &d : market.devices)
  {
    total_n += static_cast<double>(d.n_samples);
  }
  std::vector<double> payoff(N, 0.0);
  for (std::size_t m = 0; m < N; ++m)
  {
    auto const  &d      = market.devices[m];
    double       lambda = 0.0;
    if (N > 1)
    {
      for (std::size_t i = 0; i < N; ++i)
      {
        if (i != m)
        {
          lambda += market.leakage.g_influence(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
        }
      }
      lambda /= static_cast<double>(N - 1);
    }
    double const price   = market.params.total_budget * static_cast<double>(d.n_samples) / total_n;
    std::array<double, 1> const alone{1.0};
    double const value   = leakage_valuation(alone, lambda, config.valuation.b, price);
    double const bracket = price * value + group_gain(d.dtype.phi, N);
    double const a       = bracket >= 0.0 ? 1.0 : 0.0;
    payoff[m]            = a * bracket - delta * price * (1.0 - value);
  }
  MetricsReport r;
  r.strategy = "noncooperative";
  r.set_payoff(std::move(payoff), 1.0);
  r.coalition_sizes.assign(N, 1);
  r.leakage = summarize(market.leakage);
  return r;
}

namespace {

double max_of(std::vector<double> const &a, std::vector<double> const &b)
{
  double top = 0.0;
  for (double x : a)
  {
    top = std::max(top, x);
  }
  for (double x : b)
  {
    top = std::max(top, x);
  }
  return top;
}

std::vector<double> value_trace(SolveTrace const &trace)
{
  std::vector<double> out{trace.initial_value};
  for (auto const &r : trace.iterations)
  {
    out.push_back(r.value_after);
  }
  return out;
}

std::vector<std::size_t> sizes(Partition const &p)
{
  std::vector<std::size_t> out;
  for (auto const &c : p.coalitions)
  {
    out.push_back(c.members.size());
  }
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ScenarioResult run_scenario(MarketConfig const &config, std::uint64_t seed)
{
  config.validate();
  ScenarioResult out;
  SolverOptions  opts{config.max_iters};
  if (config.scenario.kind == "walkthrough")
  {
    auto const game = walkthrough_game();
    auto const t0   = std::chrono::steady_clock::now();
    out.trace       = solve_hedonic(game, opts, seed);
    out.cooperative.runtime_ms["majp"] = elapsed_ms(t0);
    std::vector<double> alone(game.size());
    for (std::size_t m = 0; m < game.size(); ++m)
    {
      std::size_t const s[1]{m};
      alone[m] = game.evaluate(s).value;
    }
    double const scale = max_of(out.trace.final_prices, alone);
    out.cooperative.strategy = "majp";
    out.cooperative.set_payoff(out.trace.final_prices, scale);
    out.baseline.strategy = "noncooperative";
    out.baseline.set_payoff(alone, scale);
    out.baseline.coalition_sizes.assign(game.size(), 1);
  }
  else
  {
    auto const market = build_market(config, seed);
    MarketGame game(market.devices, market.leakage.g_influence, market.params);
    auto const t0 = std::chrono::steady_clock::now();
    out.trace     = majp_solve(game, config.K, opts, derive_seed(seed, 77));
    out.cooperative.runtime_ms["majp"] = elapsed_ms(t0);
    out.baseline                       = baseline_noncooperative(market, config);
    double const scale = max_of(out.trace.final_prices, out.baseline.payoff);
    out.cooperative.strategy = "majp";
    out.cooperative.set_payoff(out.trace.final_prices, scale);
    out.baseline.set_payoff(out.baseline.payoff, scale);
    out.cooperative.leakage = out.baseline.leakage;
    for (auto const &d : market.devices)
    {
      out.types.push_back(d.dtype);
    }
  }
  out.cooperative.coalition_sizes = sizes(out.trace.final_partition);
  out.cooperative.value_trace     = value_trace(out.trace);
  return out;
}

Aggregate aggregate(std::vector<double> const &values)
{
  Aggregate a;
  if (values.empty())
  {
    return a;
  }
  double const n = static_cast<double>(values.size());
  a.mean         = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1)
  {
    double ss = 0.0;
    for (double v : values)
    {
      ss += (v - a.mean) * (v - a.mean);
    }
    a.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return a;
}

MonteCarloSummary monte_carlo(MarketConfig const &config, std::size_t n_runs,
                              std::uint64_t base_seed, std::size_t workers)
{
  if (n_runs == 0)
  {
    throw DomainError("monte_carlo needs at least one run");
  }
  std::vector<ScenarioResult> runs(n_runs);
  std::atomic<std::size_t>    cursor{0};
  std::exception_ptr          failure;
  std::atomic<bool>           failed{false};
  auto const                  work = [&] {
    for (std::size_t k; (k = cursor++) < n_runs;)
    {
      try
      {
        runs[k] = run_scenario(config, base_seed + k);
      }
      catch (...)
      {
        if (!failed.exchange(true))
        {
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers == 0)
  {
    workers = std::max(1U, std::thread::hardware_concurrency());
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n_runs); ++w)
  {
    pool.emplace_back(work);
  }
  for (auto &t : pool)
  {
    t.join();
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }

  std::vector<double> coop, base, gap, gain, coop_raw, base_raw, groups;
  for (auto const &r : runs)
  {
    coop.push_back(r.cooperative.normalized_average);
    base.push_back(r.baseline.normalized_average);
    gap.push_back(coop.back() - base.back());
    gain.push_back(base.back() > 0.0 ? coop.back() / base.back() - 1.0 : 0.0);
    coop_raw.push_back(r.cooperative.average_payoff);
    base_raw.push_back(r.baseline.average_payoff);
    groups.push_back(static_cast<double>(r.cooperative.coalition_sizes.size()));
  }
  MonteCarloSummary s;
  s.runs            = n_runs;
  s.cooperative     = aggregate(coop);
  s.baseline        = aggregate(base);
  s.gap             = aggregate(gap);
  s.gain            = aggregate(gain);
  s.cooperative_raw = aggregate(coop_raw);
  s.baseline_raw    = aggregate(base_raw);
  s.coalitions      = aggregate(groups);
  return s;
}

MarketConfig runtime_config(MarketConfig base, std::size_t M)
{
  auto const groups                  = std::max<std::size_t>(1, (M + 5) / 10);
  base.scenario.kind                 = "market";
  base.scenario.groups               = groups;
  base.scenario.devices_per_group    = M / groups;
  base.K                             = static_cast<int>(groups);
  base.scenario.xi_bands.clear();
  for (std::size_t k = 0; k < groups; ++k)
  {
    base.scenario.xi_bands.emplace_back(static_cast<double>(k) / static_cast<double>(groups),
                                        static_cast<double>(k + 1) / static_cast<double>(groups));
  }
  return base;
}

namespace {

double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  auto const n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<RuntimeRow> runtime_comparison(MarketConfig const &config,
                                           std::vector<std::size_t> const &Ms,
                                           std::size_t reps, std::uint64_t seed)
{
  reps = std::max<std::size_t>(reps, 5);
  std::vector<RuntimeRow> rows;
  for (auto M : Ms)
  {
    auto const cfg    = runtime_config(config, M);
    auto const market = build_market(cfg, seed);
    std::vector<double> majp, optimal;
    for (std::size_t r = 0; r < reps; ++r)
    {
      MarketGame game(market.devices, market.leakage.g_influence, market.params);
      auto const t0 = std::chrono::steady_clock::now();
      auto const tr = majp_solve(game, cfg.K, {cfg.max_iters}, derive_seed(seed, r));
      majp.push_back(elapsed_ms(t0));
      (void)tr;
    }
    double opt_ms = std::nan("");
    if (market.devices.size() <= oracle::kMaxDevices)
    {
      std::vector<int> levels;
      for (auto const &d : market.devices)
      {
        levels.push_back(d.dtype.level);
      }
      for (std::size_t r = 0; r < reps; ++r)
      {
        auto const t0  = std::chrono::steady_clock::now();
        auto const res = oracle::optimal_partition(
            market.devices.size(),
            oracle::market_worth(market.devices, market.leakage.g_influence, market.params, levels));
        optimal.push_back(elapsed_ms(t0));
        (void)res;
      }
      opt_ms = median(optimal);
    }
    rows.push_back({market.devices.size(), median(majp), opt_ms});
  }
  return rows;
}

double growth_exponent(std::vector<RuntimeRow> const &rows)
{
  std::vector<double> x, y;
  for (auto const &r : rows)
  {
    x.push_back(std::log(static_cast<double>(r.M)));
    y.push_back(std::log(std::max(r.majp_ms, 1e-6)));
  }
  double const n  = static_cast<double>(x.size());
  double const mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double const my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double       sxy = 0.0;
  double       sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

namespace {

// 1-2-5 ladder: 10, 20, 50, 100, ...
std::size_t next_checkpoint(std::size_t t)
{
  std::size_t mag = 1;
  while (mag * 10 <= t)
  {
    mag *= 10;
  }
  auto const lead = t / mag;
  return lead == 1 ? 2 * mag : (lead == 2 ? 5 * mag : 10 * mag);
}

}  // namespace

ConvergenceRun three_seller_convergence(std::size_t rounds, std::uint64_t seed, double tol)
{
  if (rounds == 0)
  {
    throw DomainError("three-seller stream needs at least one round");
  }
  Rng                              rng = make_rng(seed, 0);
  std::normal_distribution<double> normal{0.0, 1.0};
  SequentialCorrelation            est(3, tol);
  ConvergenceRun                   out;
  std::size_t                      next = 10;
  std::array<double, 3>            v{};
  for (std::size_t t = 1; t <= rounds; ++t)
  {
    v[0] = normal(rng);
    v[1] = normal(rng);
    v[2] = 0.5 * v[0] + v[1];
    est.observe(v);
    if (t == next || t == rounds)
    {
      auto const m = est.result();
      out.checkpoints.push_back({t, m.r(0, 1), m.r(0, 2), m.r(1, 2)});
      next = next_checkpoint(next);
    }
  }
  out.leakage = est.result();
  return out;
}

void emit_csv(MetricsReport const &report, std::filesystem::path const &path)
{
  CsvTable t;
  t.header = {"device_id", "payoff", "normalized_payoff"};
  for (std::size_t m = 0; m < report.payoff.size(); ++m)
  {
    t.rows.push_back({std::to_string(m), format_real(report.payoff[m]),
                      format_real(report.payoff[m] / report.scale)});
  }
  write_csv(path, t);
}

}  // namespace datamarket
