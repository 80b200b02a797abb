#include "radialfeas/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace radialfeas::cli {

namespace {

struct Field {
  const char* name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw InvalidInputError("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw InvalidInputError("config: bad integer value for " + key + ": '" + v + "'");
  }
}

#define STR_FIELD(member)                                                    \
  Field{#member, [](const ExperimentConfig& c) { return c.member; },        \
        [](ExperimentConfig& c, const std::string& v) { c.member = v; }}
#define DBL_FIELD(member)                                                    \
  Field{#member, [](const ExperimentConfig& c) { return fmt_g17(c.member); }, \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_double(#member, v); }}
#define INT_FIELD(member)                                                    \
  Field{#member, [](const ExperimentConfig& c) { return std::to_string(c.member); }, \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_int(#member, v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      STR_FIELD(task),       STR_FIELD(method),     STR_FIELD(family),
      DBL_FIELD(epsilon),    DBL_FIELD(lambda),     DBL_FIELD(softmax_tau),
      DBL_FIELD(huber_delta),DBL_FIELD(softmin_tau),STR_FIELD(hidden),
      STR_FIELD(activation), STR_FIELD(optimizer),  DBL_FIELD(lr),
      STR_FIELD(sgd_schedule), DBL_FIELD(dropout),  STR_FIELD(seeds),
      INT_FIELD(epochs),     INT_FIELD(batch),      DBL_FIELD(train_frac),
      INT_FIELD(assets),     INT_FIELD(horizon),    INT_FIELD(factors),
      INT_FIELD(lookback),   DBL_FIELD(gamma),      DBL_FIELD(caps),
      DBL_FIELD(kappa),      STR_FIELD(data),       DBL_FIELD(target_x),
      DBL_FIELD(target_y),   DBL_FIELD(init_x),     DBL_FIELD(init_y),
      INT_FIELD(toy_steps),  DBL_FIELD(toy_lr),     INT_FIELD(dc3_steps),
      DBL_FIELD(dc3_lr),     DBL_FIELD(dc3_momentum), STR_FIELD(out),
  };
  return table;
}

#undef STR_FIELD
#undef DBL_FIELD
#undef INT_FIELD

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.name) {
      f.set(*this, value);
      return;
    }
  }
  throw InvalidInputError("config: unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::items() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.name, f.get(*this));
  std::sort(out.begin(), out.end());
  return out;
}

std::string ExperimentConfig::header_comment() const {
  std::ostringstream os;
  os << "# radialfeas " << kVersion << "\n";
  for (const auto& [k, v] : items()) os << "# " << k << '=' << v << "\n";
  return os.str();
}

std::vector<uint64_t> ExperimentConfig::seed_list() const {
  std::vector<uint64_t> out;
  std::stringstream ss(seeds);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoull(tok));
  }
  if (out.empty()) throw InvalidInputError("config: seeds list is empty");
  return out;
}

std::vector<int> ExperimentConfig::hidden_sizes() const {
  std::vector<int> out;
  std::stringstream ss(hidden);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(parse_int("hidden", tok));
  }
  if (out.empty()) throw InvalidInputError("config: hidden sizes list is empty");
  return out;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("config: cannot open " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInputError("config: line " + std::to_string(lineno) + " is not key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::apply_overrides(const std::vector<std::string>& overrides) {
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw InvalidInputError("config: override '" + kv + "' is not key=value");
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

int worker_cap() {
  if (const char* env = std::getenv("RADIALFEAS_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace radialfeas::cli
