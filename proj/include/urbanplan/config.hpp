#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace urban {

// Exit-code carriers for the command line: usage -> 1, validation -> 2,
// runtime -> 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration. Every field has a default; unknown keys are
// rejected on load. Flags can override individual entries afterwards.
struct RunConfig {
  int n = 10;
  int m = 4;
  int c = 20;  // fixed by the POI taxonomy
  std::uint64_t k = 500;
  std::uint64_t seed = 7;

  int d_g = 16;
  int gcn_hidden = 16;
  int eta_dim = 16;
  int gan_hidden = 128;
  int heads = 4;
  double lambda = 1.0;
  bool attention_full_width = false;
  bool non_saturating = true;
  int condaug_hidden = 0;

  double lr_encoder = 1e-2;
  double lr_gan = 1.5e-3;
  double lr_grid = 1e-3;
  int encoder_epochs = 30;
  int gan_epochs = 80;
  int grid_epochs = 60;
  int batch = 32;

  int trajectory_count = 12;
  int trajectory_length = 24;
  double events_per_cell = 30.0;

  double lda_alpha = 0.0;  // 0 -> 50/m
  double lda_beta = 0.01;
  int lda_iterations = 200;

  std::string bin_edges = "auto";  // or "e0,e1,e2,e3"

  int eval_repeats = 4;
  std::uint64_t eval_seed = 123;

  bool no_condaug = false;
  bool no_attention = false;
  bool no_instruction = false;
  bool no_context = false;

  // Default artifact locations; command-line flags override them.
  std::string data_dir;
  std::string out_dir;
  std::string model_path;

  int cond_width() const { return d_g + 5; }
  // Smallest multiple of `heads` that fits the condition embedding; the
  // embedding is zero-padded to this width.
  int padded_width() const {
    const int w = cond_width();
    return ((w + heads - 1) / heads) * heads;
  }
  double effective_lda_alpha() const {
    return lda_alpha > 0.0 ? lda_alpha : 50.0 / static_cast<double>(m);
  }
  bool has_fixed_bin_edges() const { return bin_edges != "auto"; }
  std::array<double, 4> fixed_bin_edges() const;

  void validate() const;  // throws ValidationError

  static RunConfig from_file(const std::string& path);
  // Applies "key=value"; throws ValidationError on unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  // Canonical serialization: every key, sorted, one per line.
  std::string canonical() const;
};

}  // namespace urban
