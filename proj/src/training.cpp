#include "fingergan/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "fingergan/log.hpp"

namespace fingergan::training {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kMetricsHeader = "iter\td_loss\tg_adv\tL_r\td_acc_real\td_acc_fake";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void save_params(checkpoint::Checkpoint& ck, const std::vector<nn::Param*>& params) {
  for (const nn::Param* p : params) ck.arrays.push_back({p->name, p->shape, {p->value.begin(), p->value.end()}});
}

void save_buffers(checkpoint::Checkpoint& ck, const std::vector<nn::Buffer*>& buffers) {
  for (const nn::Buffer* b : buffers) {
    ck.arrays.push_back({b->name, {static_cast<int>(b->value.size())}, {b->value.begin(), b->value.end()}});
  }
}

const checkpoint::NamedArray& require_array(const checkpoint::Checkpoint& ck, const std::string& name, std::size_t size) {
  const auto* a = ck.find(name);
  if (!a) throw std::runtime_error("checkpoint: missing array '" + name + "'");
  if (a->values.size() != size) {
    throw std::runtime_error("checkpoint: array '" + name + "' has " + std::to_string(a->values.size()) +
                             " values, expected " + std::to_string(size));
  }
  return *a;
}

void load_params(const checkpoint::Checkpoint& ck, const std::vector<nn::Param*>& params) {
  for (nn::Param* p : params) {
    const auto& a = require_array(ck, p->name, p->size());
    p->value.assign(a.values.begin(), a.values.end());
  }
}

void load_buffers(const checkpoint::Checkpoint& ck, const std::vector<nn::Buffer*>& buffers) {
  for (nn::Buffer* b : buffers) {
    const auto& a = require_array(ck, b->name, b->value.size());
    b->value.assign(a.values.begin(), a.values.end());
  }
}

void put_specs(checkpoint::Checkpoint& ck, const nn::GeneratorSpec& g, const nn::DiscriminatorSpec& d) {
  ck.metadata["generator.in_channels"] = std::to_string(g.in_channels);
  ck.metadata["generator.base_channels"] = std::to_string(g.base_channels);
  ck.metadata["generator.slope"] = fmt(g.slope);
  ck.metadata["generator.patch"] = std::to_string(g.patch);
  ck.metadata["discriminator.in_channels"] = std::to_string(d.in_channels);
  ck.metadata["discriminator.base_channels"] = std::to_string(d.base_channels);
  ck.metadata["discriminator.slope"] = fmt(d.slope);
  ck.metadata["spec"] = nn::canonical_spec(g, d);
  ck.spec_hash = nn::spec_hash(g, d);
}

void get_specs(const checkpoint::Checkpoint& ck, nn::GeneratorSpec& g, nn::DiscriminatorSpec& d) {
  g.in_channels = std::stoi(ck.meta("generator.in_channels"));
  g.base_channels = std::stoi(ck.meta("generator.base_channels"));
  g.slope = std::stof(ck.meta("generator.slope"));
  g.patch = std::stoi(ck.meta("generator.patch"));
  d.in_channels = std::stoi(ck.meta("discriminator.in_channels"));
  d.base_channels = std::stoi(ck.meta("discriminator.base_channels"));
  d.slope = std::stof(ck.meta("discriminator.slope"));
  if (nn::spec_hash(g, d) != ck.spec_hash) {
    throw std::runtime_error("checkpoint: spec hash mismatch (stored " + std::to_string(ck.spec_hash) +
                             ", metadata describes " + std::to_string(nn::spec_hash(g, d)) + ")");
  }
}

std::vector<double> scores(const nn::Tensor& s, int begin, int end) {
  std::vector<double> out;
  for (int i = begin; i < end; ++i) out.push_back(s.data[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

Adam::Adam(std::vector<nn::Param*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (const nn::Param* p : params_) {
    m_.emplace_back(p->size(), 0.0f);
    v_.emplace_back(p->size(), 0.0f);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    nn::Param& p = *params_[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      const double mi = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      const double vi = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double update = cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
      p.value[i] = static_cast<float>(p.value[i] - update);
    }
  }
}

void Adam::save(checkpoint::Checkpoint& ck, const std::string& prefix) const {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    ck.arrays.push_back({prefix + "m/" + params_[k]->name, params_[k]->shape, m_[k]});
    ck.arrays.push_back({prefix + "v/" + params_[k]->name, params_[k]->shape, v_[k]});
  }
  ck.metadata[prefix + "steps"] = std::to_string(t_);
}

void Adam::load(const checkpoint::Checkpoint& ck, const std::string& prefix) {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    m_[k] = require_array(ck, prefix + "m/" + params_[k]->name, params_[k]->size()).values;
    v_[k] = require_array(ck, prefix + "v/" + params_[k]->name, params_[k]->size()).values;
  }
  t_ = std::stoull(ck.meta(prefix + "steps"));
}

std::string Ablations::mode() const {
  std::string m;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!m.empty()) m += '+';
    m += name;
  };
  add(no_discriminator, "no-discriminator");
  add(gray_gt, "gray-gt");
  add(no_weight, "no-weight");
  return m.empty() ? "full" : m;
}

void TrainConfig::validate() const {
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw std::invalid_argument("train: Adam betas must lie in [0,1)");
  }
  if (!(adam.epsilon > 0.0)) throw std::invalid_argument("train: Adam epsilon must be > 0");
  loss.validate();
  generator.validate();
  discriminator.validate();
  if (discriminator.in_channels != 2 || generator.in_channels != 1) {
    throw std::invalid_argument("train: the generator takes 1 channel and the discriminator 2");
  }
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (max_iterations < 0) throw std::invalid_argument("train: max iterations must be >= 0");
  if (checkpoint_every < 1) throw std::invalid_argument("train: checkpoint interval must be >= 1");
  if (!(init_stddev > 0.0)) throw std::invalid_argument("train: init stddev must be > 0");
  if (!ablations.no_discriminator && generator.patch % 64 != 0) {
    throw std::invalid_argument("train: with a discriminator the patch must be a multiple of 64");
  }
}

void append_crop(Batch& b, int slot, const dataset::Example& ex, int x, int y, const Ablations& abl) {
  const int p = b.latent.h;
  const RealGrid& target = abl.gray_gt ? ex.gray : ex.skeleton;
  for (int yy = 0; yy < p; ++yy) {
    for (int xx = 0; xx < p; ++xx) {
      b.latent.at(slot, 0, yy, xx) = static_cast<float>(ex.latent(x + xx, y + yy));
      b.target.at(slot, 0, yy, xx) = static_cast<float>(target(x + xx, y + yy));
      b.orientation.at(slot, 0, yy, xx) = static_cast<float>(ex.orientation(x + xx, y + yy));
      b.weight.at(slot, 0, yy, xx) = abl.no_weight ? 1.0f : static_cast<float>(ex.weight(x + xx, y + yy));
    }
  }
}

Batch make_batch(const dataset::Dataset& data, const std::vector<int>& indices,
                 const std::vector<std::pair<int, int>>& offsets, int patch, const Ablations& abl) {
  if (indices.size() != offsets.size() || indices.empty()) throw std::invalid_argument("make_batch: bad index/offset lists");
  const int n = static_cast<int>(indices.size());
  Batch b{nn::Tensor(n, 1, patch, patch), nn::Tensor(n, 1, patch, patch), nn::Tensor(n, 1, patch, patch),
          nn::Tensor(n, 1, patch, patch), indices};
  for (int i = 0; i < n; ++i) {
    const auto& ex = data.examples.at(static_cast<std::size_t>(indices[static_cast<std::size_t>(i)]));
    const auto [x, y] = offsets[static_cast<std::size_t>(i)];
    if (x < 0 || y < 0 || x + patch > ex.latent.width() || y + patch > ex.latent.height()) {
      throw std::invalid_argument("make_batch: crop outside example " + ex.id);
    }
    append_crop(b, i, ex, x, y, abl);
  }
  return b;
}

MetricsLog::MetricsLog(const std::filesystem::path& path, const TrainConfig& cfg, bool append) : path_(path) {
  const bool fresh = !append || !std::filesystem::exists(path);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
  if (!out) throw std::runtime_error("cannot write metrics log " + path.string());
  if (fresh) {
    out << "# mode=" << cfg.ablations.mode() << " seed=" << cfg.seed << " eta=" << fmt(cfg.loss.eta)
        << " learning_rate=" << fmt(cfg.adam.learning_rate) << " batch_size=" << cfg.batch_size
        << " patch=" << cfg.generator.patch << "\n"
        << kMetricsHeader << "\n";
  }
}

void MetricsLog::write(const StepMetrics& m) {
  std::ofstream out(path_, std::ios::app);
  out << m.iteration << '\t' << fmt(m.d_loss) << '\t' << fmt(m.g_adv) << '\t' << fmt(m.l_r) << '\t'
      << fmt(m.d_acc_real) << '\t' << fmt(m.d_acc_fake) << '\n';
  if (!out) throw std::runtime_error("failed writing metrics log " + path_.string());
}

std::vector<StepMetrics> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics log " + path.string());
  std::vector<StepMetrics> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == kMetricsHeader) continue;
    std::istringstream row(line);
    StepMetrics m;
    std::string cells[6];
    for (auto& c : cells) {
      if (!std::getline(row, c, '\t')) throw std::runtime_error("malformed metrics row: " + line);
    }
    m.iteration = std::stoull(cells[0]);
    double* fields[5] = {&m.d_loss, &m.g_adv, &m.l_r, &m.d_acc_real, &m.d_acc_fake};
    for (int i = 0; i < 5; ++i) *fields[i] = std::strtod(cells[i + 1].c_str(), nullptr);
    out.push_back(m);
  }
  return out;
}

std::string metrics_mode(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto pos = line.find("mode=");
  if (line.rfind("#", 0) != 0 || pos == std::string::npos) return {};
  const auto end = line.find(' ', pos);
  return line.substr(pos + 5, end == std::string::npos ? std::string::npos : end - pos - 5);
}

Trainer::Trainer(TrainConfig cfg, const dataset::Dataset& data)
    : cfg_(std::move(cfg)), data_(data), gen_(cfg_.generator), disc_(cfg_.discriminator) {
  cfg_.validate();
  if (data_.empty()) throw std::invalid_argument("train: empty dataset");
  for (const auto& ex : data_.examples) {
    if (ex.latent.width() < cfg_.generator.patch || ex.latent.height() < cfg_.generator.patch) {
      throw std::invalid_argument("train: example " + ex.id + " is smaller than the patch");
    }
  }
  const RandomSource root(cfg_.seed);
  RandomSource g_init = root.derive(0), d_init = root.derive(1);
  gen_.init(g_init, cfg_.init_stddev);
  disc_.init(d_init, cfg_.init_stddev);
  g_opt_ = Adam(gen_.params(), cfg_.adam);
  d_opt_ = Adam(disc_.params(), cfg_.adam);
}

Batch Trainer::batch_for(std::uint64_t iter) const {
  const std::size_t n = data_.size();
  const auto bs = static_cast<std::size_t>(cfg_.batch_size);
  const RandomSource root(cfg_.seed);
  const RandomSource shuffle_root = root.derive(2);
  RandomSource crop_rng = root.derive(3).derive(iter);
  std::vector<int> indices;
  std::vector<std::pair<int, int>> offsets;
  std::uint64_t cached_epoch = std::numeric_limits<std::uint64_t>::max();
  std::vector<int> perm(n);
  for (std::size_t j = 0; j < bs; ++j) {
    const std::uint64_t s = (iter - 1) * bs + j;
    const std::uint64_t epoch = s / n;
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), 0);
      RandomSource r = shuffle_root.derive(epoch);
      for (std::size_t i = n; i > 1; --i) {
        const auto k = static_cast<std::size_t>(r.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(perm[i - 1], perm[k]);
      }
      cached_epoch = epoch;
    }
    const int idx = perm[s % n];
    const auto& ex = data_.examples[static_cast<std::size_t>(idx)];
    const int p = cfg_.generator.patch;
    const int x = static_cast<int>(crop_rng.uniform_int(0, ex.latent.width() - p));
    const int y = static_cast<int>(crop_rng.uniform_int(0, ex.latent.height() - p));
    indices.push_back(idx);
    offsets.emplace_back(x, y);
  }
  return make_batch(data_, indices, offsets, cfg_.generator.patch, cfg_.ablations);
}

nn::Tensor Trainer::fake_pair(const nn::Tensor& fake, const Batch& b) const {
  return nn::concat_batch(nn::concat_channels(b.target, b.orientation), nn::concat_channels(fake, b.orientation));
}

void Trainer::check_finite(double v, const char* what, const Batch& b) const {
  if (std::isfinite(v)) return;
  std::string idx;
  for (const int i : b.indices) idx += (idx.empty() ? "" : ",") + data_.examples[static_cast<std::size_t>(i)].id;
  throw NonFiniteLoss(std::string("non-finite ") + what + " at iteration " + std::to_string(iteration_ + 1) +
                      "; batch examples: " + idx);
}

StepMetrics Trainer::d_step(const Batch& b) { return update_discriminator(gen_.forward(b.latent, false), b); }

StepMetrics Trainer::g_step(const Batch& b, bool adversarial) {
  return update_generator(gen_.forward(b.latent, true), b, adversarial);
}

StepMetrics Trainer::update_discriminator(const nn::Tensor& fake, const Batch& b) {
  StepMetrics m;
  m.l_r = losses::reconstruction_loss(fake, b.target, b.weight);
  m.g_adv = kNaN;
  const int n = b.latent.n;
  nn::zero_grads(disc_.params());
  const nn::Tensor s = disc_.forward(fake_pair(fake, b), true, true);
  const auto real = scores(s, 0, n), fk = scores(s, n, 2 * n);
  m.d_loss = losses::adversarial_losses(real, fk).d_loss;
  check_finite(m.d_loss, "discriminator loss", b);
  std::vector<double> dr, df;
  losses::d_loss_grad(real, fk, dr, df);
  nn::Tensor ds(2 * n, 1, 1, 1);
  for (int i = 0; i < n; ++i) {
    ds.data[static_cast<std::size_t>(i)] = static_cast<float>(dr[static_cast<std::size_t>(i)]);
    ds.data[static_cast<std::size_t>(n + i)] = static_cast<float>(df[static_cast<std::size_t>(i)]);
  }
  disc_.backward(ds);
  d_opt_.step();
  int correct_real = 0, correct_fake = 0;
  for (int i = 0; i < n; ++i) {
    correct_real += real[static_cast<std::size_t>(i)] > 0.5;
    correct_fake += fk[static_cast<std::size_t>(i)] < 0.5;
  }
  m.d_acc_real = static_cast<double>(correct_real) / n;
  m.d_acc_fake = static_cast<double>(correct_fake) / n;
  return m;
}

StepMetrics Trainer::update_generator(const nn::Tensor& fake, const Batch& b, bool adversarial) {
  StepMetrics m;
  m.d_loss = m.d_acc_real = m.d_acc_fake = kNaN;
  m.l_r = losses::reconstruction_loss(fake, b.target, b.weight);
  check_finite(m.l_r, "reconstruction loss", b);
  nn::Tensor dg = losses::reconstruction_grad(fake, b.target, b.weight);
  if (adversarial) {
    const int n = b.latent.n;
    const nn::Tensor s = disc_.forward(fake_pair(fake, b), true, false);
    const auto fk = scores(s, n, 2 * n);
    m.g_adv = losses::adversarial_losses(scores(s, 0, n), fk, cfg_.loss.generator_form).g_loss;
    check_finite(m.g_adv, "generator adversarial loss", b);
    const auto dfk = losses::g_loss_grad(fk, cfg_.loss.generator_form);
    nn::Tensor ds(2 * n, 1, 1, 1);
    for (int i = 0; i < n; ++i) ds.data[static_cast<std::size_t>(n + i)] = static_cast<float>(dfk[static_cast<std::size_t>(i)]);
    const nn::Tensor dx = disc_.backward(ds);
    nn::zero_grads(disc_.params());
    const float eta = static_cast<float>(cfg_.loss.eta);
    const std::size_t plane = dg.plane();
    for (int i = 0; i < n; ++i) {
      const float* src = dx.sample(n + i);  // channel 0 of the fake half
      float* dst = dg.sample(i);
      for (std::size_t j = 0; j < plane; ++j) dst[j] = src[j] + eta * dst[j];
    }
  } else {
    m.g_adv = kNaN;
  }
  nn::zero_grads(gen_.params());
  gen_.backward(dg);
  g_opt_.step();
  return m;
}

StepMetrics Trainer::train_step(const Batch& b) {
  // One training-mode generator forward feeds both updates; the generator
  // is unchanged until its own update.
  const nn::Tensor fake = gen_.forward(b.latent, true);
  StepMetrics m;
  if (cfg_.ablations.no_discriminator) {
    m = update_generator(fake, b, false);
  } else {
    const StepMetrics dm = update_discriminator(fake, b);
    m = update_generator(fake, b, true);
    m.d_loss = dm.d_loss;
    m.d_acc_real = dm.d_acc_real;
    m.d_acc_fake = dm.d_acc_fake;
  }
  m.iteration = ++iteration_;
  return m;
}

void Trainer::run(MetricsLog* log, const std::filesystem::path& ckpt_dir) {
  while (iteration_ < static_cast<std::uint64_t>(cfg_.max_iterations)) {
    const StepMetrics m = train_step(batch_for(iteration_ + 1));
    if (log) log->write(m);
    const bool last = iteration_ == static_cast<std::uint64_t>(cfg_.max_iterations);
    if (!ckpt_dir.empty() && (iteration_ % static_cast<std::uint64_t>(cfg_.checkpoint_every) == 0 || last)) {
      checkpoint::write_checkpoint(to_checkpoint(), checkpoint_path(ckpt_dir, iteration_));
      checkpoint::write_checkpoint(to_checkpoint(), ckpt_dir / "latest.ckpt");
    }
    if (iteration_ % 50 == 0) {
      log::info("train: iteration " + std::to_string(iteration_) + " L_r=" + fmt(m.l_r) + " d_loss=" + fmt(m.d_loss));
    }
  }
}

double Trainer::evaluate(const dataset::Dataset& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const int p = cfg_.generator.patch;
  double total = 0.0;
  const Ablations plain;
  for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(cfg_.batch_size)) {
    std::vector<int> idx;
    std::vector<std::pair<int, int>> off;
    for (std::size_t i = start; i < std::min(data.size(), start + static_cast<std::size_t>(cfg_.batch_size)); ++i) {
      const auto& ex = data.examples[i];
      idx.push_back(static_cast<int>(i));
      off.emplace_back((ex.latent.width() - p) / 2, (ex.latent.height() - p) / 2);
    }
    const Batch b = make_batch(data, idx, off, p, plain);
    const nn::Tensor out = gen_.forward(b.latent, false);
    total += losses::reconstruction_loss(out, b.target, b.weight) * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(data.size());
}

checkpoint::Checkpoint Trainer::to_checkpoint() const {
  auto& self = const_cast<Trainer&>(*this);
  checkpoint::Checkpoint ck;
  put_specs(ck, cfg_.generator, cfg_.discriminator);
  ck.iteration = iteration_;
  ck.metadata["mode"] = cfg_.ablations.mode();
  ck.metadata["seed"] = std::to_string(cfg_.seed);
  ck.metadata["eta"] = fmt(cfg_.loss.eta);
  ck.metadata["learning_rate"] = fmt(cfg_.adam.learning_rate);
  ck.metadata["batch_size"] = std::to_string(cfg_.batch_size);
  save_params(ck, self.gen_.params());
  save_buffers(ck, self.gen_.buffers());
  save_params(ck, self.disc_.params());
  save_buffers(ck, self.disc_.buffers());
  g_opt_.save(ck, "adam.G.");
  d_opt_.save(ck, "adam.D.");
  return ck;
}

void Trainer::restore(const checkpoint::Checkpoint& ck) {
  const std::uint64_t expected = nn::spec_hash(cfg_.generator, cfg_.discriminator);
  if (ck.spec_hash != expected) {
    throw std::runtime_error("checkpoint: spec hash " + std::to_string(ck.spec_hash) + " does not match the configured network " +
                             std::to_string(expected));
  }
  load_params(ck, gen_.params());
  load_buffers(ck, gen_.buffers());
  load_params(ck, disc_.params());
  load_buffers(ck, disc_.buffers());
  g_opt_.load(ck, "adam.G.");
  d_opt_.load(ck, "adam.D.");
  iteration_ = ck.iteration;
}

nn::Generator load_generator(const checkpoint::Checkpoint& ck) {
  nn::GeneratorSpec g;
  nn::DiscriminatorSpec d;
  get_specs(ck, g, d);
  nn::Generator gen(g);
  load_params(ck, gen.params());
  load_buffers(ck, gen.buffers());
  return gen;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint64_t iter) {
  char name[32];
  std::snprintf(name, sizeof name, "iter_%08llu.ckpt", static_cast<unsigned long long>(iter));
  return dir / name;
}

}  // namespace fingergan::training
