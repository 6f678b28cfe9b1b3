#include "oblique/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "oblique/matrix_io.hpp"
#include "oblique/random.hpp"

namespace oblique {

std::string Strategy::label() const {
  switch (kind) {
    case StrategyKind::Centralized: return "centralized";
    case StrategyKind::Diffusion: return "diffusion";
    case StrategyKind::MultiHop: return "multihop:" + std::to_string(hops);
    case StrategyKind::OrthogonalOnly: return "orthogonal-only";
  }
  return "?";
}

Strategy Strategy::parse(const std::string& text) {
  if (text == "centralized") return {StrategyKind::Centralized, 0};
  if (text == "diffusion") return {StrategyKind::Diffusion, 0};
  if (text == "orthogonal-only") return {StrategyKind::OrthogonalOnly, 0};
  if (text.rfind("multihop:", 0) == 0) {
    const std::string tail = text.substr(9);
    Index hops = 0;
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), hops);
    if (ec == std::errc() && ptr == tail.data() + tail.size() && hops >= 1) return {StrategyKind::MultiHop, hops};
  }
  throw Error(ErrorCode::ParseError, "unknown strategy '" + text + "'");
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::InvalidParam, what); };
  check(nodes >= 2, "nodes must be >= 2");
  check(block >= 1, "block must be >= 1");
  check(edge_prob > 0.0 && edge_prob <= 1.0, "edge_prob must lie in (0, 1]");
  check(signal_rank >= 1, "signal_rank must be >= 1");
  check(interference_rank >= 0, "interference_rank must be >= 0");
  check(signal_rank + interference_rank <= nodes, "signal_rank + interference_rank must not exceed nodes");
  check(mu > 0.0 && mu_centralized > 0.0, "step sizes must be positive");
  check(nu > 0.0 && nu <= 1.0, "nu must lie in (0, 1]");
  check(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  check(runs >= 1, "runs must be >= 1");
  check(iterations >= 0, "iterations must be >= 0");
  check(!strategies.empty(), "at least one strategy is required");
  check(sigma_u2_min > 0.0 && sigma_u2_min <= sigma_u2_max, "bad sigma_u2 range");
  check(sigma_v2_min >= 0.0 && sigma_v2_min <= sigma_v2_max, "bad sigma_v2 range");
  check(steady_fraction > 0.0 && steady_fraction <= 1.0, "steady_fraction must lie in (0, 1]");
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "desk") return cfg;
  if (name == "paper") {
    cfg.preset = "paper";
    cfg.nodes = 50;
    cfg.block = 5;
    cfg.edge_prob = 0.25;
    cfg.runs = 200;
    cfg.iterations = 3000;
    return cfg;
  }
  throw Error(ErrorCode::InvalidParam, "unknown preset '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error(ErrorCode::ParseError, "bad value for '" + key + "': '" + value + "'");
  return out;
}

std::vector<Strategy> parse_strategies(const std::string& value) {
  std::vector<Strategy> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(Strategy::parse(item));
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto idx = [](Index ExperimentConfig::*field) {
      return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.*field = parse_number<Index>(k, v);
      };
    };
    auto dbl = [](double ExperimentConfig::*field) {
      return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.*field = parse_number<double>(k, v);
      };
    };
    t["nodes"] = idx(&ExperimentConfig::nodes);
    t["block"] = idx(&ExperimentConfig::block);
    t["edge_prob"] = dbl(&ExperimentConfig::edge_prob);
    t["signal_rank"] = idx(&ExperimentConfig::signal_rank);
    t["interference_rank"] = idx(&ExperimentConfig::interference_rank);
    t["mu"] = dbl(&ExperimentConfig::mu);
    t["nu"] = dbl(&ExperimentConfig::nu);
    t["mu_centralized"] = dbl(&ExperimentConfig::mu_centralized);
    t["eps"] = dbl(&ExperimentConfig::eps);
    t["runs"] = idx(&ExperimentConfig::runs);
    t["iterations"] = idx(&ExperimentConfig::iterations);
    t["seed"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.seed = parse_number<std::uint64_t>(k, v);
    };
    t["strategies"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.strategies = parse_strategies(v);
    };
    t["coef_mean"] = dbl(&ExperimentConfig::coef_mean);
    t["sigma_u2_min"] = dbl(&ExperimentConfig::sigma_u2_min);
    t["sigma_u2_max"] = dbl(&ExperimentConfig::sigma_u2_max);
    t["sigma_v2_min"] = dbl(&ExperimentConfig::sigma_v2_min);
    t["sigma_v2_max"] = dbl(&ExperimentConfig::sigma_v2_max);
    t["steady_fraction"] = dbl(&ExperimentConfig::steady_fraction);
    return t;
  }();
  return table;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  ExperimentConfig cfg = std::move(base);
  std::string line;
  bool seen_other = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "preset") {
      if (seen_other) throw Error(ErrorCode::ParseError, "'preset' must precede all other keys");
      cfg = preset_config(value);
      continue;
    }
    auto it = setters().find(key);
    if (it == setters().end()) throw Error(ErrorCode::ParseError, "unknown key '" + key + "'");
    it->second(cfg, key, value);
    seen_other = true;
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_config(in, std::move(base));
}

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "# rng = " << kRngName << "\n"
      << "preset = " << c.preset << '\n'
      << "nodes = " << c.nodes << '\n'
      << "block = " << c.block << '\n'
      << "edge_prob = " << format_double(c.edge_prob) << '\n'
      << "signal_rank = " << c.signal_rank << '\n'
      << "interference_rank = " << c.interference_rank << '\n'
      << "mu = " << format_double(c.mu) << '\n'
      << "nu = " << format_double(c.nu) << '\n'
      << "mu_centralized = " << format_double(c.mu_centralized) << '\n'
      << "eps = " << format_double(c.eps) << '\n'
      << "runs = " << c.runs << '\n'
      << "iterations = " << c.iterations << '\n'
      << "seed = " << c.seed << '\n'
      << "strategies = ";
  for (std::size_t i = 0; i < c.strategies.size(); ++i) out << (i ? "," : "") << c.strategies[i].label();
  out << '\n'
      << "coef_mean = " << format_double(c.coef_mean) << '\n'
      << "sigma_u2_min = " << format_double(c.sigma_u2_min) << '\n'
      << "sigma_u2_max = " << format_double(c.sigma_u2_max) << '\n'
      << "sigma_v2_min = " << format_double(c.sigma_v2_min) << '\n'
      << "sigma_v2_max = " << format_double(c.sigma_v2_max) << '\n'
      << "steady_fraction = " << format_double(c.steady_fraction) << '\n';
  return out.str();
}

std::string fingerprint(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : echo_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace oblique
