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

#include "datamarket/config.hpp"

#include "datamarket/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace datamarket {
namespace {

class Section
{
public:
  Section(YAML::Node node, std::string name, std::set<std::string> keys)
    : node_{std::move(node)}
    , name_{std::move(name)}
  {
    if (!node_)
    {
      return;
    }
    if (!node_.IsMap())
    {
      throw ConfigError("section '" + name_ + "' must be a mapping");
    }
    for (auto const &kv : node_)
    {
      auto const key = kv.first.as<std::string>();
      if (!keys.count(key))
      {
        throw ConfigError("unknown key '" + name_ + "." + key + "'");
      }
    }
  }

  template <typename T>
  void read(char const *key, T &out) const
  {
    if (!node_ || !node_[key])
    {
      return;
    }
    try
    {
      out = node_[key].template as<T>();
    }
    catch (YAML::Exception const &e)
    {
      throw ConfigError("bad value for '" + name_ + "." + key + "': " + e.msg);
    }
  }

private:
  YAML::Node  node_;
  std::string name_;
};

void require(bool ok, std::string const &msg)
{
  if (!ok)
  {
    throw ConfigError(msg);
  }
}

}  // namespace

void MarketConfig::validate() const
{
  try
  {
    valuation.validate();
  }
  catch (DomainError const &e)
  {
    throw ConfigError(std::string("valuation: ") + e.what());
  }
  require(total_budget >= 0.0, "market.total_budget must be non-negative");
  require(delta >= 0.0, "market.delta must be non-negative");
  require(K >= 1, "market.K must be at least 1");
  require(d >= 1, "market.d must be at least 1");
  require(unit_comm_cost >= 0.0, "market.unit_comm_cost must be non-negative");
  require(max_iters >= 1, "solver.max_iters must be at least 1");
  require(correlation_tol > 0.0, "leakage.tol must be positive");
  require(rho_max >= 0.0 && coalition_cost_bound >= 0.0 && phi_threshold >= 0.0,
          "constraint bounds must be non-negative");
  for (double g : leakage_g)
  {
    require(g >= 0.0 && g <= 1.0, "leakage.g_schedule entries must lie in [0, 1]");
  }
  require(scenario.kind == "market" || scenario.kind == "walkthrough",
          "scenario.kind must be 'market' or 'walkthrough'");
  if (scenario.kind == "market")
  {
    require(scenario.groups >= 1 && scenario.devices_per_group >= 1,
            "scenario needs at least one group with one device");
    require(scenario.samples_min >= 1 && scenario.samples_min <= scenario.samples_max,
            "scenario sample range must satisfy 1 <= samples_min <= samples_max");
    require(scenario.intra_correlation >= 0.0 && scenario.intra_correlation <= 1.0,
            "scenario.intra_correlation must lie in [0, 1]");
    require(scenario.cross_decay >= 0.0 && scenario.cross_decay <= 1.0,
            "scenario.cross_decay must lie in [0, 1]");
    require(scenario.xi_bands.size() == scenario.groups,
            "scenario.xi_bands needs one [low, high] pair per group");
    for (auto const &[lo, hi] : scenario.xi_bands)
    {
      require(lo >= 0.0 && lo <= hi && hi <= 1.0, "scenario.xi_bands must be sub-intervals of [0, 1]");
    }
    require(scenario.price_per_device >= 0.0, "scenario.price_per_device must be non-negative");
    require(scenario.label_noise >= 0.0, "scenario.label_noise must be non-negative");
  }
  require(learner.batch >= 1 && learner.draws >= 1, "learner batch and draws must be positive");
  require(learner.learning_rate > 0.0, "learner.learning_rate must be positive");
  require(learner.reference_samples >= 1, "learner.reference_samples must be positive");
  require(!depression.shares.empty(), "depression.shares must not be empty");
  require(depression.late_seller < depression.shares.size(), "depression.late_seller out of range");
  require(depression.price_min >= 0.0 && depression.price_min <= depression.price_max &&
              depression.price_step > 0.0,
          "depression price range is invalid");
}

MarketConfig default_config()
{
  return MarketConfig{};
}

MarketConfig parse_config(std::string const &text)
{
  YAML::Node root;
  try
  {
    root = YAML::Load(text);
  }
  catch (YAML::Exception const &e)
  {
    throw ConfigError("config parse error: " + e.msg);
  }
  MarketConfig cfg = default_config();
  if (!root || root.IsNull())
  {
    cfg.validate();
    return cfg;
  }
  if (!root.IsMap())
  {
    throw ConfigError("config root must be a mapping of sections");
  }
  std::set<std::string> const sections{"market", "valuation", "leakage", "constraints",
                                        "solver", "scenario",  "learner", "depression"};
  for (auto const &kv : root)
  {
    auto const name = kv.first.as<std::string>();
    if (!sections.count(name))
    {
      throw ConfigError("unknown section '" + name + "'");
    }
  }

  Section market(root["market"], "market",
                 {"total_budget", "delta", "K", "d", "unit_comm_cost", "comm_rounds", "seed"});
  market.read("total_budget", cfg.total_budget);
  market.read("delta", cfg.delta);
  market.read("K", cfg.K);
  market.read("d", cfg.d);
  market.read("unit_comm_cost", cfg.unit_comm_cost);
  market.read("comm_rounds", cfg.comm_rounds);
  market.read("seed", cfg.seed);

  Section val(root["valuation"], "valuation", {"gamma", "A0", "noise_mu", "noise_sigma", "b", "g"});
  val.read("gamma", cfg.valuation.gamma);
  val.read("A0", cfg.valuation.A0);
  val.read("noise_mu", cfg.valuation.noise_mu);
  val.read("noise_sigma", cfg.valuation.noise_sigma);
  val.read("b", cfg.valuation.b);
  val.read("g", cfg.valuation.g);

  Section leak(root["leakage"], "leakage", {"g_schedule", "tol"});
  leak.read("g_schedule", cfg.leakage_g);
  leak.read("tol", cfg.correlation_tol);

  Section cons(root["constraints"], "constraints",
               {"rho_max", "coalition_cost_bound", "phi_threshold"});
  cons.read("rho_max", cfg.rho_max);
  cons.read("coalition_cost_bound", cfg.coalition_cost_bound);
  cons.read("phi_threshold", cfg.phi_threshold);

  Section solver(root["solver"], "solver", {"max_iters"});
  solver.read("max_iters", cfg.max_iters);

  Section sc(root["scenario"], "scenario",
             {"kind", "groups", "devices_per_group", "samples_min", "samples_max",
              "intra_correlation", "cross_decay", "xi_bands", "price_per_device", "label_noise"});
  sc.read("kind", cfg.scenario.kind);
  sc.read("groups", cfg.scenario.groups);
  sc.read("devices_per_group", cfg.scenario.devices_per_group);
  sc.read("samples_min", cfg.scenario.samples_min);
  sc.read("samples_max", cfg.scenario.samples_max);
  sc.read("intra_correlation", cfg.scenario.intra_correlation);
  sc.read("cross_decay", cfg.scenario.cross_decay);
  std::vector<std::vector<double>> bands;
  sc.read("xi_bands", bands);
  if (!bands.empty())
  {
    cfg.scenario.xi_bands.clear();
    for (auto const &b : bands)
    {
      require(b.size() == 2, "scenario.xi_bands entries must be [low, high]");
      cfg.scenario.xi_bands.emplace_back(b[0], b[1]);
    }
  }
  sc.read("price_per_device", cfg.scenario.price_per_device);
  sc.read("label_noise", cfg.scenario.label_noise);

  Section lr(root["learner"], "learner",
             {"batch", "draws", "train_steps", "learning_rate", "reference_samples"});
  lr.read("batch", cfg.learner.batch);
  lr.read("draws", cfg.learner.draws);
  lr.read("train_steps", cfg.learner.train_steps);
  lr.read("learning_rate", cfg.learner.learning_rate);
  lr.read("reference_samples", cfg.learner.reference_samples);

  Section dep(root["depression"], "depression",
              {"shares", "late_seller", "price_min", "price_max", "price_step"});
  dep.read("shares", cfg.depression.shares);
  dep.read("late_seller", cfg.depression.late_seller);
  dep.read("price_min", cfg.depression.price_min);
  dep.read("price_max", cfg.depression.price_max);
  dep.read("price_step", cfg.depression.price_step);

  cfg.validate();
  return cfg;
}

MarketConfig load_config(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try
  {
    return parse_config(buf.str());
  }
  catch (ConfigError const &e)
  {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace datamarket
