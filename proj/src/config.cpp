#include "urbanplan/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace urban {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config: expected bool, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& v) {
  std::istringstream is(v);
  T out;
  is >> out;
  if (is.fail() || !is.eof()) {
    throw ValidationError("config: bad numeric value '" + v + "'");
  }
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"n", {[](RunConfig& c, const std::string& v) { c.n = parse_number<int>(v); },
             [](const RunConfig& c) { return std::to_string(c.n); }}},
      {"m", {[](RunConfig& c, const std::string& v) { c.m = parse_number<int>(v); },
             [](const RunConfig& c) { return std::to_string(c.m); }}},
      {"c", {[](RunConfig& c, const std::string& v) { c.c = parse_number<int>(v); },
             [](const RunConfig& c) { return std::to_string(c.c); }}},
      {"k", {[](RunConfig& c, const std::string& v) { c.k = parse_number<std::uint64_t>(v); },
             [](const RunConfig& c) { return std::to_string(c.k); }}},
      {"seed", {[](RunConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>(v); },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"d_g", {[](RunConfig& c, const std::string& v) { c.d_g = parse_number<int>(v); },
               [](const RunConfig& c) { return std::to_string(c.d_g); }}},
      {"gcn_hidden", {[](RunConfig& c, const std::string& v) { c.gcn_hidden = parse_number<int>(v); },
                      [](const RunConfig& c) { return std::to_string(c.gcn_hidden); }}},
      {"eta_dim", {[](RunConfig& c, const std::string& v) { c.eta_dim = parse_number<int>(v); },
                   [](const RunConfig& c) { return std::to_string(c.eta_dim); }}},
      {"gan_hidden", {[](RunConfig& c, const std::string& v) { c.gan_hidden = parse_number<int>(v); },
                      [](const RunConfig& c) { return std::to_string(c.gan_hidden); }}},
      {"heads", {[](RunConfig& c, const std::string& v) { c.heads = parse_number<int>(v); },
                 [](const RunConfig& c) { return std::to_string(c.heads); }}},
      {"lambda", {[](RunConfig& c, const std::string& v) { c.lambda = parse_number<double>(v); },
                  [](const RunConfig& c) { return format_double(c.lambda); }}},
      {"attention_full_width",
       {[](RunConfig& c, const std::string& v) { c.attention_full_width = parse_bool(v); },
        [](const RunConfig& c) { return c.attention_full_width ? "true" : "false"; }}},
      {"non_saturating",
       {[](RunConfig& c, const std::string& v) { c.non_saturating = parse_bool(v); },
        [](const RunConfig& c) { return c.non_saturating ? "true" : "false"; }}},
      {"condaug_hidden",
       {[](RunConfig& c, const std::string& v) { c.condaug_hidden = parse_number<int>(v); },
        [](const RunConfig& c) { return std::to_string(c.condaug_hidden); }}},
      {"lr_encoder", {[](RunConfig& c, const std::string& v) { c.lr_encoder = parse_number<double>(v); },
                      [](const RunConfig& c) { return format_double(c.lr_encoder); }}},
      {"lr_gan", {[](RunConfig& c, const std::string& v) { c.lr_gan = parse_number<double>(v); },
                  [](const RunConfig& c) { return format_double(c.lr_gan); }}},
      {"lr_grid", {[](RunConfig& c, const std::string& v) { c.lr_grid = parse_number<double>(v); },
                   [](const RunConfig& c) { return format_double(c.lr_grid); }}},
      {"encoder_epochs",
       {[](RunConfig& c, const std::string& v) { c.encoder_epochs = parse_number<int>(v); },
        [](const RunConfig& c) { return std::to_string(c.encoder_epochs); }}},
      {"gan_epochs", {[](RunConfig& c, const std::string& v) { c.gan_epochs = parse_number<int>(v); },
                      [](const RunConfig& c) { return std::to_string(c.gan_epochs); }}},
      {"grid_epochs", {[](RunConfig& c, const std::string& v) { c.grid_epochs = parse_number<int>(v); },
                       [](const RunConfig& c) { return std::to_string(c.grid_epochs); }}},
      {"batch", {[](RunConfig& c, const std::string& v) { c.batch = parse_number<int>(v); },
                 [](const RunConfig& c) { return std::to_string(c.batch); }}},
      {"trajectory_count",
       {[](RunConfig& c, const std::string& v) { c.trajectory_count = parse_number<int>(v); },
        [](const RunConfig& c) { return std::to_string(c.trajectory_count); }}},
      {"trajectory_length",
       {[](RunConfig& c, const std::string& v) { c.trajectory_length = parse_number<int>(v); },
        [](const RunConfig& c) { return std::to_string(c.trajectory_length); }}},
      {"events_per_cell",
       {[](RunConfig& c, const std::string& v) { c.events_per_cell = parse_number<double>(v); },
        [](const RunConfig& c) { return format_double(c.events_per_cell); }}},
      {"lda_alpha", {[](RunConfig& c, const std::string& v) { c.lda_alpha = parse_number<double>(v); },
                     [](const RunConfig& c) { return format_double(c.lda_alpha); }}},
      {"lda_beta", {[](RunConfig& c, const std::string& v) { c.lda_beta = parse_number<double>(v); },
                    [](const RunConfig& c) { return format_double(c.lda_beta); }}},
      {"lda_iterations",
       {[](RunConfig& c, const std::string& v) { c.lda_iterations = parse_number<int>(v); },
        [](const RunConfig& c) { return std::to_string(c.lda_iterations); }}},
      {"bin_edges", {[](RunConfig& c, const std::string& v) { c.bin_edges = v; },
                     [](const RunConfig& c) { return c.bin_edges; }}},
      {"eval_repeats",
       {[](RunConfig& c, const std::string& v) { c.eval_repeats = parse_number<int>(v); },
        [](const RunConfig& c) { return std::to_string(c.eval_repeats); }}},
      {"eval_seed", {[](RunConfig& c, const std::string& v) { c.eval_seed = parse_number<std::uint64_t>(v); },
                     [](const RunConfig& c) { return std::to_string(c.eval_seed); }}},
      {"no_condaug", {[](RunConfig& c, const std::string& v) { c.no_condaug = parse_bool(v); },
                      [](const RunConfig& c) { return c.no_condaug ? "true" : "false"; }}},
      {"no_attention", {[](RunConfig& c, const std::string& v) { c.no_attention = parse_bool(v); },
                        [](const RunConfig& c) { return c.no_attention ? "true" : "false"; }}},
      {"no_instruction", {[](RunConfig& c, const std::string& v) { c.no_instruction = parse_bool(v); },
                          [](const RunConfig& c) { return c.no_instruction ? "true" : "false"; }}},
      {"no_context", {[](RunConfig& c, const std::string& v) { c.no_context = parse_bool(v); },
                      [](const RunConfig& c) { return c.no_context ? "true" : "false"; }}},
      {"data_dir", {[](RunConfig& c, const std::string& v) { c.data_dir = v; },
                    [](const RunConfig& c) { return c.data_dir; }}},
      {"out_dir", {[](RunConfig& c, const std::string& v) { c.out_dir = v; },
                   [](const RunConfig& c) { return c.out_dir; }}},
      {"model_path", {[](RunConfig& c, const std::string& v) { c.model_path = v; },
                      [](const RunConfig& c) { return c.model_path; }}},
  };
  return table;
}

}  // namespace

std::array<double, 4> RunConfig::fixed_bin_edges() const {
  std::array<double, 4> edges{};
  std::istringstream is(bin_edges);
  std::string part;
  int i = 0;
  while (std::getline(is, part, ',')) {
    if (i >= 4) throw ValidationError("config: bin_edges needs 4 values");
    edges[static_cast<std::size_t>(i++)] = parse_number<double>(trim(part));
  }
  if (i != 4) throw ValidationError("config: bin_edges needs 4 values");
  return edges;
}

void RunConfig::validate() const {
  if (n < 2 || n > 256) throw ValidationError("config: n must be in [2,256]");
  if (m < 1 || m > std::min(64, n * n)) {
    throw ValidationError("config: m must be in [1, min(64, n*n)]");
  }
  if (c != 20) throw ValidationError("config: c is fixed at 20");
  if (k > 2000000ull) throw ValidationError("config: k too large");
  if (d_g < 1 || gcn_hidden < 1 || eta_dim < 1 || gan_hidden < 1) {
    throw ValidationError("config: model widths must be >= 1");
  }
  if (heads < 1 || heads > cond_width()) {
    throw ValidationError("config: heads must be in [1, d_g+5]");
  }
  if (condaug_hidden < 0) throw ValidationError("config: condaug_hidden < 0");
  if (lr_encoder <= 0 || lr_gan <= 0 || lr_grid <= 0) {
    throw ValidationError("config: learning rates must be positive");
  }
  if (encoder_epochs < 0 || gan_epochs < 0 || grid_epochs < 0) {
    throw ValidationError("config: epochs must be >= 0");
  }
  if (batch < 1) throw ValidationError("config: batch must be >= 1");
  if (trajectory_count < 1 || trajectory_length < 1) {
    throw ValidationError("config: trajectory settings must be >= 1");
  }
  if (events_per_cell <= 0) throw ValidationError("config: events_per_cell <= 0");
  if (lda_alpha < 0 || lda_beta <= 0 || lda_iterations < 1) {
    throw ValidationError("config: bad topic-model settings");
  }
  if (eval_repeats < 1) throw ValidationError("config: eval_repeats < 1");
  if (has_fixed_bin_edges()) {
    const auto edges = fixed_bin_edges();
    for (int i = 0; i < 3; ++i) {
      if (!(edges[static_cast<std::size_t>(i)] < edges[static_cast<std::size_t>(i + 1)])) {
        throw ValidationError("config: bin_edges must increase");
      }
    }
  }
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config: line " + std::to_string(lineno) +
                            " is not key=value");
    }
    cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& table = fields();
  auto it = table.find(key);
  if (it == table.end()) {
    throw ValidationError("config: unknown key '" + key + "'");
  }
  it->second.set(*this, value);
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  for (const auto& [key, field] : fields()) {
    os << key << " = " << field.get(*this) << '\n';
  }
  return os.str();
}

}  // namespace urban
