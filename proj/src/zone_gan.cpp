#include "urbanplan/zone_gan.hpp"

#include <cmath>
#include <stdexcept>

#include "urbanplan/optimizer.hpp"
#include "urbanplan/rng.hpp"

namespace urban {

namespace {

constexpr double kLogitClamp = 1e-7;

Tensor gaussian_init(std::vector<std::size_t> shape, double stddev,
                     std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = stddev * rng.normal();
  return t;
}

Parameter dense_init(const char* name, std::size_t in, std::size_t out,
                     std::uint64_t seed) {
  return Parameter(name, gaussian_init({in, out},
                                       std::sqrt(2.0 / static_cast<double>(in)),
                                       seed));
}

}  // namespace

ZoneGanParams ZoneGanParams::init(int n, int m, int eta_dim, int cond_width,
                                  int hidden, std::uint64_t seed) {
  if (n < 1 || m < 1 || eta_dim < 1 || cond_width < 1 || hidden < 1) {
    throw std::invalid_argument("ZoneGanParams: bad dimensions");
  }
  ZoneGanParams p;
  p.n = n;
  p.m = m;
  p.eta_dim = eta_dim;
  p.cond_width = cond_width;
  p.hidden = hidden;
  const std::size_t gin = static_cast<std::size_t>(eta_dim + cond_width);
  const std::size_t h = static_cast<std::size_t>(hidden);
  const std::size_t plan = static_cast<std::size_t>(p.plan_width());
  const std::size_t din = plan + static_cast<std::size_t>(cond_width);
  p.g_w1 = dense_init("zonegan.g.w1", gin, h, mix_seed(seed, 1));
  p.g_b1 = Parameter("zonegan.g.b1", Tensor({1, h}));
  p.g_w2 = dense_init("zonegan.g.w2", h, h, mix_seed(seed, 2));
  p.g_b2 = Parameter("zonegan.g.b2", Tensor({1, h}));
  p.g_w3 = dense_init("zonegan.g.w3", h, plan, mix_seed(seed, 3));
  p.g_b3 = Parameter("zonegan.g.b3", Tensor({1, plan}));
  p.d_w1 = dense_init("zonegan.d.w1", din, h, mix_seed(seed, 4));
  p.d_b1 = Parameter("zonegan.d.b1", Tensor({1, h}));
  p.d_w2 = dense_init("zonegan.d.w2", h, h, mix_seed(seed, 5));
  p.d_b2 = Parameter("zonegan.d.b2", Tensor({1, h}));
  p.d_w3 = dense_init("zonegan.d.w3", h, 1, mix_seed(seed, 6));
  p.d_b3 = Parameter("zonegan.d.b3", Tensor({1, 1}));
  return p;
}

std::vector<Parameter*> ZoneGanParams::generator_params() {
  return {&g_w1, &g_b1, &g_w2, &g_b2, &g_w3, &g_b3};
}

std::vector<Parameter*> ZoneGanParams::discriminator_params() {
  return {&d_w1, &d_b1, &d_w2, &d_b2, &d_w3, &d_b3};
}

std::vector<Parameter*> ZoneGanParams::params() {
  auto g = generator_params();
  auto d = discriminator_params();
  g.insert(g.end(), d.begin(), d.end());
  return g;
}

Var build_generator(Graph& g, Var eta_c, ZoneGanParams& params, bool trainable) {
  auto bind = [&](Parameter& p) {
    return trainable ? g.param(p) : g.input(p.value);
  };
  const std::size_t batch = eta_c.value().rows();
  if (eta_c.value().cols() !=
      static_cast<std::size_t>(params.eta_dim + params.cond_width)) {
    throw std::invalid_argument("build_generator: input width mismatch");
  }
  Var h1 = relu(add_rowvec(matmul(eta_c, bind(params.g_w1)), bind(params.g_b1)));
  Var h2 = relu(add_rowvec(matmul(h1, bind(params.g_w2)), bind(params.g_b2)));
  Var logits = add_rowvec(matmul(h2, bind(params.g_w3)), bind(params.g_b3));
  // Per-grid softmax over M labels.
  const std::size_t cells =
      static_cast<std::size_t>(params.n) * static_cast<std::size_t>(params.n);
  Var grid = reshape(logits, {batch * cells, static_cast<std::size_t>(params.m)});
  Var soft = softmax_rows(grid);
  return reshape(soft, {batch, cells * static_cast<std::size_t>(params.m)});
}

Var build_discriminator(Graph& g, Var plan_z, ZoneGanParams& params,
                        bool trainable) {
  auto bind = [&](Parameter& p) {
    return trainable ? g.param(p) : g.input(p.value);
  };
  if (plan_z.value().cols() !=
      static_cast<std::size_t>(params.plan_width() + params.cond_width)) {
    throw std::invalid_argument("build_discriminator: input width mismatch");
  }
  Var h1 = relu(add_rowvec(matmul(plan_z, bind(params.d_w1)), bind(params.d_b1)));
  Var h2 = relu(add_rowvec(matmul(h1, bind(params.d_w2)), bind(params.d_b2)));
  Var logit = add_rowvec(matmul(h2, bind(params.d_w3)), bind(params.d_b3));
  return sigmoid(logit);
}

Tensor generate_zones(const Tensor& eta, const Tensor& c,
                      const ZoneGanParams& params) {
  if (eta.size() != static_cast<std::size_t>(params.eta_dim) ||
      c.size() != static_cast<std::size_t>(params.cond_width)) {
    throw std::invalid_argument("generate_zones: input size mismatch");
  }
  Graph g;
  Tensor joint({1, eta.size() + c.size()});
  for (std::size_t i = 0; i < eta.size(); ++i) joint.at(0, i) = eta.at(i);
  for (std::size_t i = 0; i < c.size(); ++i) joint.at(0, eta.size() + i) = c.at(i);
  Var soft = build_generator(g, g.input(joint),
                             const_cast<ZoneGanParams&>(params), false);
  return soft.value().reshaped({static_cast<std::size_t>(params.n),
                                static_cast<std::size_t>(params.n),
                                static_cast<std::size_t>(params.m)});
}

ZonePlan harden(const Tensor& soft_plan) {
  if (soft_plan.rank() != 3) throw std::invalid_argument("harden: rank != 3");
  const std::size_t n = soft_plan.dim(0), m = soft_plan.dim(2);
  ZonePlan plan;
  plan.n = static_cast<int>(n);
  plan.labels.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t best = 0;
      for (std::size_t z = 1; z < m; ++z) {
        if (soft_plan.at(i, j, z) > soft_plan.at(i, j, best)) best = z;
      }
      plan.labels[i * n + j] = static_cast<int>(best);
    }
  }
  return plan;
}

Tensor one_hot_plan(const ZonePlan& plan, int m) {
  const std::size_t n = static_cast<std::size_t>(plan.n);
  Tensor out({n, n, static_cast<std::size_t>(m)});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int label = plan.labels[i * n + j];
      if (label < 0 || label >= m) {
        throw std::invalid_argument("one_hot_plan: label out of range");
      }
      out.at(i, j, static_cast<std::size_t>(label)) = 1.0;
    }
  }
  return out;
}

double discriminate(const Tensor& plan, const Tensor& z,
                    const ZoneGanParams& params) {
  if (plan.size() != static_cast<std::size_t>(params.plan_width()) ||
      z.size() != static_cast<std::size_t>(params.cond_width)) {
    throw std::invalid_argument("discriminate: input size mismatch");
  }
  Graph g;
  Tensor joint({1, plan.size() + z.size()});
  for (std::size_t i = 0; i < plan.size(); ++i) joint.at(0, i) = plan.at(i);
  for (std::size_t i = 0; i < z.size(); ++i) joint.at(0, plan.size() + i) = z.at(i);
  Var score = build_discriminator(g, g.input(joint),
                                  const_cast<ZoneGanParams&>(params), false);
  return score.value().at(0);
}

Var build_generator_loss(Graph& g, const GanBatch& batch, ZoneGanParams& params,
                         AugmentorParams& augmentor, double lambda,
                         bool non_saturating, bool no_condaug, bool trainable) {
  Var z = g.input(batch.conditions);
  Var eta = g.input(batch.eta);
  Var c{};
  Var kl{};
  bool has_kl = false;
  if (no_condaug) {
    c = z;
  } else {
    auto heads = build_augmentor_heads(g, z, augmentor, trainable);
    Var noise = g.input(batch.epsilon);
    c = add(heads.mu, mul(exp_elem(scale(heads.logvar, 0.5)), noise));
    kl = build_kl_penalty(g, heads);
    has_kl = true;
  }
  Var fake = build_generator(g, concat_cols({eta, c}), params, trainable);
  Var score = build_discriminator(g, concat_cols({fake, z}), params,
                                  /*trainable=*/false);
  Var safe = clamp_passthrough(score, kLogitClamp, 1.0 - kLogitClamp);
  Var adv = non_saturating
                ? scale(sum_all(log_elem(safe)), -1.0)
                : sum_all(log_elem(rsub_scalar(1.0, safe)));
  if (has_kl && lambda != 0.0) {
    return add(adv, scale(kl, lambda));
  }
  return adv;
}

Var build_discriminator_loss(Graph& g, const GanBatch& batch,
                             const Tensor& fake_plans, ZoneGanParams& params,
                             bool trainable) {
  Var z = g.input(batch.conditions);
  Var fake_score = build_discriminator(
      g, concat_cols({g.input(fake_plans), z}), params, trainable);
  Var real_score = build_discriminator(
      g, concat_cols({g.input(batch.real_plans), z}), params, trainable);
  Var safe_fake = clamp_passthrough(fake_score, kLogitClamp, 1.0 - kLogitClamp);
  Var safe_real = clamp_passthrough(real_score, kLogitClamp, 1.0 - kLogitClamp);
  return add(sum_all(log_elem(rsub_scalar(1.0, safe_fake))),
             sum_all(log_elem(safe_real)));
}

namespace {

Tensor rows_subset(const Tensor& all, const std::vector<std::size_t>& order,
                   std::size_t start, std::size_t stop) {
  const std::size_t cols = all.cols();
  Tensor out({stop - start, cols});
  for (std::size_t r = start; r < stop; ++r) {
    const std::size_t src = order[r];
    for (std::size_t c = 0; c < cols; ++c) out.at(r - start, c) = all.at(src, c);
  }
  return out;
}

Tensor normal_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.normal();
  return t;
}

// Aggregate label histogram KL between real one-hot plans and hardened
// generated plans, smoothed.
double label_kl(const Tensor& real_plans, const Tensor& fake_plans, int m) {
  const std::size_t rows = real_plans.rows();
  const std::size_t cols = real_plans.cols();
  const std::size_t cells = cols / static_cast<std::size_t>(m);
  std::vector<double> pr(static_cast<std::size_t>(m), 1e-9);
  std::vector<double> pf(static_cast<std::size_t>(m), 1e-9);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t cell = 0; cell < cells; ++cell) {
      std::size_t br = 0, bf = 0;
      for (std::size_t z = 1; z < static_cast<std::size_t>(m); ++z) {
        if (real_plans.at(r, cell * static_cast<std::size_t>(m) + z) >
            real_plans.at(r, cell * static_cast<std::size_t>(m) + br))
          br = z;
        if (fake_plans.at(r, cell * static_cast<std::size_t>(m) + z) >
            fake_plans.at(r, cell * static_cast<std::size_t>(m) + bf))
          bf = z;
      }
      pr[br] += 1.0;
      pf[bf] += 1.0;
    }
  }
  double sr = 0.0, sf = 0.0;
  for (int z = 0; z < m; ++z) {
    sr += pr[static_cast<std::size_t>(z)];
    sf += pf[static_cast<std::size_t>(z)];
  }
  double kl = 0.0;
  for (int z = 0; z < m; ++z) {
    const double p = pr[static_cast<std::size_t>(z)] / sr;
    const double q = pf[static_cast<std::size_t>(z)] / sf;
    kl += p * std::log(p / q);
  }
  return kl;
}

}  // namespace

GanTrainLog train_zone_gan(const Tensor& conditions, const Tensor& real_plans,
                           ZoneGanParams& params, AugmentorParams& augmentor,
                           const GanTrainOptions& opts) {
  const std::size_t count = conditions.rows();
  if (count == 0 || real_plans.rows() != count) {
    throw std::invalid_argument("train_zone_gan: empty or mismatched data");
  }
  if (real_plans.cols() != static_cast<std::size_t>(params.plan_width())) {
    throw std::invalid_argument("train_zone_gan: plan width mismatch");
  }

  Rng rng(mix_seed(opts.seed, 0x47414eull));
  AdamConfig cfg;
  cfg.learning_rate = opts.learning_rate;
  AdamOptimizer opt_g(cfg), opt_d(cfg);
  auto gen_side = params.generator_params();
  if (!opts.no_condaug) {
    for (Parameter* p : augmentor.params()) gen_side.push_back(p);
  }
  auto disc_side = params.discriminator_params();

  const std::size_t probe = std::min<std::size_t>(count, 128);
  auto fake_for_probe = [&](std::uint64_t tag) {
    Rng prng(mix_seed(opts.seed, tag));
    Tensor eta = normal_tensor({probe, static_cast<std::size_t>(params.eta_dim)}, prng);
    Tensor eps = normal_tensor({probe, static_cast<std::size_t>(params.cond_width)}, prng);
    Tensor z({probe, conditions.cols()});
    for (std::size_t r = 0; r < probe; ++r)
      for (std::size_t c = 0; c < conditions.cols(); ++c) z.at(r, c) = conditions.at(r, c);
    Tensor cond = z;
    if (!opts.no_condaug) cond = augment(z, eps, augmentor);
    Graph g;
    Var fake = build_generator(g, concat_cols({g.input(eta), g.input(cond)}),
                               params, false);
    return fake.value();
  };
  auto diagnose = [&](std::uint64_t tag) {
    GanEpochDiag d;
    const Tensor fake = fake_for_probe(tag);
    Tensor z({probe, conditions.cols()});
    Tensor real({probe, real_plans.cols()});
    for (std::size_t r = 0; r < probe; ++r) {
      for (std::size_t c = 0; c < conditions.cols(); ++c) z.at(r, c) = conditions.at(r, c);
      for (std::size_t c = 0; c < real_plans.cols(); ++c) real.at(r, c) = real_plans.at(r, c);
    }
    Graph g;
    Var zin = g.input(z);
    Var fs = build_discriminator(g, concat_cols({g.input(fake), zin}), params, false);
    Var rs = build_discriminator(g, concat_cols({g.input(real), zin}), params, false);
    for (std::size_t r = 0; r < probe; ++r) {
      d.mean_fake_score += fs.value().at(r, 0);
      d.mean_real_score += rs.value().at(r, 0);
    }
    d.mean_fake_score /= static_cast<double>(probe);
    d.mean_real_score /= static_cast<double>(probe);
    d.label_distribution_kl = label_kl(real, fake, params.m);
    return d;
  };

  GanTrainLog log;
  log.epochs.push_back(diagnose(0xD1A0));

  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < count;
         start += static_cast<std::size_t>(opts.batch)) {
      const std::size_t stop =
          std::min(count, start + static_cast<std::size_t>(opts.batch));
      GanBatch batch;
      batch.conditions = rows_subset(conditions, order, start, stop);
      batch.real_plans = rows_subset(real_plans, order, start, stop);
      const std::size_t b = stop - start;

      // Discriminator ascent step; the generator is a constant here.
      batch.eta = normal_tensor({b, static_cast<std::size_t>(params.eta_dim)}, rng);
      batch.epsilon =
          normal_tensor({b, static_cast<std::size_t>(params.cond_width)}, rng);
      Tensor fake_detached;
      {
        Tensor c = opts.no_condaug
                       ? batch.conditions
                       : augment(batch.conditions, batch.epsilon, augmentor);
        Graph g;
        Var fake = build_generator(
            g, concat_cols({g.input(batch.eta), g.input(c)}), params, false);
        fake_detached = fake.value();
      }
      double loss_d_value = 0.0;
      {
        for (Parameter* p : disc_side) p->reset_grad();
        Graph g;
        Var loss_d = build_discriminator_loss(g, batch, fake_detached, params, true);
        loss_d_value = loss_d.value().at(0);
        if (!std::isfinite(loss_d_value)) {
          throw std::runtime_error("train_zone_gan: non-finite discriminator loss");
        }
        // Ascent on L_D = descent on -L_D.
        Var neg = scale(loss_d, -1.0);
        g.backward(neg);
        opt_d.step(disc_side);
      }

      // Generator descent step with fresh noise.
      batch.eta = normal_tensor({b, static_cast<std::size_t>(params.eta_dim)}, rng);
      batch.epsilon =
          normal_tensor({b, static_cast<std::size_t>(params.cond_width)}, rng);
      double loss_g_value = 0.0;
      double kl_value = 0.0;
      {
        for (Parameter* p : gen_side) p->reset_grad();
        Graph g;
        Var loss_g = build_generator_loss(g, batch, params, augmentor, opts.lambda,
                                          opts.non_saturating, opts.no_condaug, true);
        loss_g_value = loss_g.value().at(0);
        if (!std::isfinite(loss_g_value)) {
          throw std::runtime_error("train_zone_gan: non-finite generator loss");
        }
        g.backward(loss_g);
        opt_g.step(gen_side);
      }
      if (!opts.no_condaug) kl_value = kl_penalty(batch.conditions, augmentor);

      log.steps.push_back({step++, loss_g_value, loss_d_value, kl_value});
    }
    log.epochs.push_back(diagnose(0xD1A1 + static_cast<std::uint64_t>(epoch)));
  }
  return log;
}

}  // namespace urban
