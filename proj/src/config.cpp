#include "qos/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace qos {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Parser {
  ExperimentConfig cfg;
  std::vector<ParseError> errors;
  ClientConfig* current_client = nullptr;
  bool saw_scenario = false;

  void fail(int line, const std::string& message) {
    errors.push_back({line, message});
  }

  bool parse_double(int line, const std::string& key, const std::string& value,
                    double& out) {
    try {
      std::size_t used = 0;
      out = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing");
      return true;
    } catch (const std::exception&) {
      fail(line, key + ": not a number: '" + value + "'");
      return false;
    }
  }

  bool parse_int(int line, const std::string& key, const std::string& value,
                 std::int64_t& out) {
    const char* begin = value.data();
    const char* end = begin + value.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end) {
      fail(line, key + ": not an integer: '" + value + "'");
      return false;
    }
    return true;
  }

  void global_key(int line, const std::string& key, const std::string& value) {
    std::int64_t i = 0;
    double d = 0.0;
    if (key == "scenario") {
      saw_scenario = true;
      if (value == "solve") {
        cfg.scenario = Scenario::Solve;
      } else if (value == "simulate") {
        cfg.scenario = Scenario::Simulate;
      } else if (value == "bid") {
        cfg.scenario = Scenario::Bid;
      } else if (value == "replicate-paper") {
        cfg.scenario = Scenario::ReplicatePaper;
      } else {
        fail(line, "scenario: unknown value '" + value + "'");
      }
    } else if (key == "tau") {
      if (parse_int(line, key, value, i)) {
        if (i < 1) {
          fail(line, "tau must be at least 1");
        } else {
          cfg.tau = static_cast<int>(i);
        }
      }
    } else if (key == "subset_limit") {
      if (parse_int(line, key, value, i)) {
        if (i < 1 || i > 30) {
          fail(line, "subset_limit must lie in [1,30]");
        } else {
          cfg.subset_limit = static_cast<int>(i);
        }
      }
    } else if (key == "solver_tol") {
      if (parse_double(line, key, value, d)) {
        if (!(d > 0.0)) {
          fail(line, "solver_tol must be positive");
        } else {
          cfg.solver_tol = d;
        }
      }
    } else if (key == "sim_tol") {
      if (parse_double(line, key, value, d)) {
        if (!(d > 0.0)) {
          fail(line, "sim_tol must be positive");
        } else {
          cfg.sim_tol = d;
        }
      }
    } else if (key == "policy") {
      if (value == "wt") {
        cfg.policy = PolicyKind::Wt;
      } else if (value == "gtt") {
        cfg.policy = PolicyKind::Gtt;
      } else if (value == "rand") {
        cfg.policy = PolicyKind::Rand;
      } else if (value == "prand") {
        cfg.policy = PolicyKind::Prand;
      } else {
        fail(line, "policy: unknown value '" + value + "'");
      }
    } else if (key == "periods") {
      if (parse_int(line, key, value, i)) {
        if (i < 1) {
          fail(line, "periods must be at least 1");
        } else {
          cfg.periods = i;
        }
      }
    } else if (key == "seed") {
      if (parse_int(line, key, value, i)) {
        cfg.seeds = {static_cast<std::uint64_t>(i)};
      }
    } else if (key == "seeds") {
      std::vector<std::uint64_t> seeds;
      std::istringstream ss(value);
      std::string item;
      bool ok = true;
      while (std::getline(ss, item, ',')) {
        std::int64_t s = 0;
        if (!parse_int(line, key, trim(item), s)) {
          ok = false;
          break;
        }
        seeds.push_back(static_cast<std::uint64_t>(s));
      }
      if (ok && seeds.empty()) {
        fail(line, "seeds must not be empty");
        ok = false;
      }
      if (ok) cfg.seeds = std::move(seeds);
    } else if (key == "checkpoint_every") {
      if (parse_int(line, key, value, i)) {
        if (i < 0) {
          fail(line, "checkpoint_every must be non-negative");
        } else {
          cfg.checkpoint_every = i;
        }
      }
    } else if (key == "alpha") {
      if (parse_double(line, key, value, d)) {
        if (!(d > 0.0 && d < 1.0)) {
          fail(line, "alpha must lie in (0,1)");
        } else {
          cfg.damping = d;
        }
      }
    } else if (key == "max_iters") {
      if (parse_int(line, key, value, i)) {
        if (i < 1) {
          fail(line, "max_iters must be at least 1");
        } else {
          cfg.max_iters = static_cast<int>(i);
        }
      }
    } else if (key == "fp_tol") {
      if (parse_double(line, key, value, d)) {
        if (d < 0.0) {
          fail(line, "fp_tol must be non-negative");
        } else {
          cfg.fp_tol = d;
        }
      }
    } else if (key == "backend") {
      if (value == "analytic") {
        cfg.backend = BidBackendKind::Analytic;
      } else if (value == "simulation") {
        cfg.backend = BidBackendKind::Simulation;
      } else {
        fail(line, "backend: unknown value '" + value + "'");
      }
    } else if (key == "bid_update_periods") {
      if (parse_int(line, key, value, i)) {
        if (i < 1) {
          fail(line, "bid_update_periods must be at least 1");
        } else {
          cfg.bid_update_periods = i;
        }
      }
    } else if (key == "program") {
      if (value == "access-point") {
        cfg.program = SolveProgram::AccessPoint;
      } else if (value == "system") {
        cfg.program = SolveProgram::System;
      } else {
        fail(line, "program: unknown value '" + value + "'");
      }
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "format") {
      if (value == "csv") {
        cfg.format = ResultFormat::Csv;
      } else if (value == "json") {
        cfg.format = ResultFormat::Json;
      } else {
        fail(line, "format: unknown value '" + value + "'");
      }
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }

  void client_key(int line, const std::string& key, const std::string& value) {
    ClientConfig& c = *current_client;
    double d = 0.0;
    if (key == "p") {
      if (parse_double(line, key, value, d)) {
        if (!(d > 0.0 && d <= 1.0)) {
          fail(line, "p must lie in (0,1]");
        } else {
          c.p = d;
        }
      }
    } else if (key == "utility") {
      if (value == "log" || value == "power") {
        c.utility = value;
      } else {
        fail(line, "utility: unknown value '" + value + "'");
      }
    } else if (key == "gamma") {
      if (parse_double(line, key, value, d)) {
        if (!(d > 0.0)) {
          fail(line, "gamma must be positive");
        } else {
          c.gamma = d;
        }
      }
    } else if (key == "alpha") {
      if (parse_double(line, key, value, d)) {
        if (!(d > 0.0 && d < 1.0)) {
          fail(line, "alpha must lie in (0,1)");
        } else {
          c.alpha = d;
        }
      }
    } else if (key == "bid") {
      if (parse_double(line, key, value, d)) {
        if (!(d > 0.0)) {
          fail(line, "bid must be positive");
        } else {
          c.bid = d;
        }
      }
    } else if (key == "a") {
      if (parse_double(line, key, value, d)) {
        if (!(d > 0.0)) {
          fail(line, "a must be positive");
        } else {
          c.a = d;
        }
      }
    } else if (key == "b") {
      if (parse_double(line, key, value, d)) {
        if (d < 0.0) {
          fail(line, "b must be non-negative");
        } else {
          c.b = d;
        }
      }
    } else if (key == "key") {
      if (parse_double(line, key, value, d)) c.key = d;
    } else {
      fail(line, "unknown client key '" + key + "'");
    }
  }
};

}  // namespace

ParseResult parse_config(const std::string& text) {
  Parser p;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  std::vector<int> section_lines;

  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = trim(raw);
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        p.fail(line_no, "unterminated section header");
        continue;
      }
      const std::string section = trim(line.substr(1, line.size() - 2));
      constexpr const char* kPrefix = "client.";
      if (section.rfind(kPrefix, 0) != 0) {
        p.fail(line_no, "unknown section '" + section + "'");
        p.current_client = nullptr;
        continue;
      }
      std::int64_t id = 0;
      if (!p.parse_int(line_no, "client id", section.substr(7), id) || id < 1) {
        p.fail(line_no, "client section needs a positive integer id");
        p.current_client = nullptr;
        continue;
      }
      for (const ClientConfig& c : p.cfg.clients) {
        if (c.id == id) {
          p.fail(line_no, "duplicate client section " + std::to_string(id));
        }
      }
      p.cfg.clients.push_back({});
      p.cfg.clients.back().id = static_cast<int>(id);
      p.current_client = &p.cfg.clients.back();
      section_lines.push_back(line_no);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      p.fail(line_no, "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      p.fail(line_no, "expected 'key = value'");
      continue;
    }
    if (p.current_client != nullptr) {
      p.client_key(line_no, key, value);
    } else {
      p.global_key(line_no, key, value);
    }
  }

  // roster-level checks, anchored to the section lines
  std::vector<std::size_t> order(p.cfg.clients.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return p.cfg.clients[x].id < p.cfg.clients[y].id;
  });
  std::vector<ClientConfig> sorted;
  sorted.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const ClientConfig& c = p.cfg.clients[order[k]];
    const int anchor = section_lines.empty() ? 0 : section_lines[order[k]];
    if (c.id != static_cast<int>(k) + 1) {
      p.fail(anchor, "client ids must be contiguous from 1");
    }
    if (c.p == 0.0) {
      p.fail(anchor, "client " + std::to_string(c.id) + " is missing p");
    }
    sorted.push_back(c);
  }
  p.cfg.clients = std::move(sorted);

  if (p.cfg.clients.empty() && p.cfg.scenario != Scenario::ReplicatePaper) {
    p.fail(0, "at least one [client.<id>] section is required");
  }

  ParseResult result;
  result.errors = std::move(p.errors);
  if (result.errors.empty()) result.config = std::move(p.cfg);
  return result;
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "scenario = ";
  switch (cfg.scenario) {
    case Scenario::Solve: os << "solve"; break;
    case Scenario::Simulate: os << "simulate"; break;
    case Scenario::Bid: os << "bid"; break;
    case Scenario::ReplicatePaper: os << "replicate-paper"; break;
  }
  os << '\n';
  os << "tau = " << cfg.tau << '\n';
  os << "subset_limit = " << cfg.subset_limit << '\n';
  os << "solver_tol = " << format_number(cfg.solver_tol) << '\n';
  os << "sim_tol = " << format_number(cfg.sim_tol) << '\n';
  os << "policy = ";
  switch (cfg.policy) {
    case PolicyKind::Wt: os << "wt"; break;
    case PolicyKind::Gtt: os << "gtt"; break;
    case PolicyKind::Rand: os << "rand"; break;
    case PolicyKind::Prand: os << "prand"; break;
  }
  os << '\n';
  os << "periods = " << cfg.periods << '\n';
  os << "seeds = ";
  for (std::size_t k = 0; k < cfg.seeds.size(); ++k) {
    if (k > 0) os << ',';
    os << cfg.seeds[k];
  }
  os << '\n';
  os << "checkpoint_every = " << cfg.checkpoint_every << '\n';
  os << "alpha = " << format_number(cfg.damping) << '\n';
  os << "max_iters = " << cfg.max_iters << '\n';
  os << "fp_tol = " << format_number(cfg.fp_tol) << '\n';
  os << "backend = "
     << (cfg.backend == BidBackendKind::Analytic ? "analytic" : "simulation")
     << '\n';
  os << "bid_update_periods = " << cfg.bid_update_periods << '\n';
  os << "program = "
     << (cfg.program == SolveProgram::AccessPoint ? "access-point" : "system")
     << '\n';
  if (!cfg.out.empty()) os << "out = " << cfg.out << '\n';
  os << "format = " << (cfg.format == ResultFormat::Csv ? "csv" : "json")
     << '\n';

  for (const ClientConfig& c : cfg.clients) {
    os << "\n[client." << c.id << "]\n";
    os << "p = " << format_number(c.p) << '\n';
    os << "bid = " << format_number(c.bid) << '\n';
    os << "utility = " << c.utility << '\n';
    if (c.utility == "power") {
      os << "gamma = " << format_number(c.gamma) << '\n';
      os << "alpha = " << format_number(c.alpha) << '\n';
    }
    os << "a = " << format_number(c.a) << '\n';
    os << "b = " << format_number(c.b) << '\n';
    if (c.key.has_value()) os << "key = " << format_number(*c.key) << '\n';
  }
  return os.str();
}

SystemConfig ExperimentConfig::system_config() const {
  SystemConfig sys;
  sys.tau = tau;
  sys.subset_limit = subset_limit;
  sys.solver_tol = solver_tol;
  sys.sim_tol = sim_tol;
  sys.clients.reserve(clients.size());
  for (const ClientConfig& c : clients) {
    ClientSpec spec;
    spec.id = c.id;
    spec.p = c.p;
    spec.initial_bid = c.bid;
    spec.utility = c.utility == "power" ? make_power_utility(c.gamma, c.alpha)
                                        : make_log_utility();
    sys.clients.push_back(std::move(spec));
  }
  sys.validate();
  return sys;
}

Policy ExperimentConfig::build_policy() const {
  switch (policy) {
    case PolicyKind::Wt:
      return WeightedTransmission{initial_bids()};
    case PolicyKind::Gtt: {
      PolicyParams params;
      for (const ClientConfig& c : clients) {
        params.a.push_back(c.a);
        params.b.push_back(c.b);
      }
      return GeneralizedTT{std::move(params)};
    }
    case PolicyKind::Rand:
      return RandomOrder{};
    case PolicyKind::Prand: {
      PriorityRandom prand;
      for (const ClientConfig& c : clients) {
        prand.key.push_back(c.key.value_or(c.gamma));
      }
      return prand;
    }
  }
  throw std::logic_error("unreachable policy kind");
}

BidVector ExperimentConfig::initial_bids() const {
  BidVector bids;
  bids.rho.reserve(clients.size());
  for (const ClientConfig& c : clients) bids.rho.push_back(c.bid);
  return bids;
}

}  // namespace qos
