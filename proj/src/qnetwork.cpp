#include "ranxrl/qnetwork.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace ranxrl {

namespace {

constexpr char kMagic[4] = {'Q', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  write_u64(os, v);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) {
  std::uint64_t v = read_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

void write_vec(std::ostream& os, const std::vector<double>& v) {
  for (double d : v) write_f64(os, d);
}

void read_vec(std::istream& is, std::vector<double>& v) {
  for (double& d : v) d = read_f64(is);
}

}  // namespace

QNetwork::QNetwork(std::vector<int> layer_sizes, std::uint64_t init_seed,
                   AdamConfig adam)
    : layer_sizes_(std::move(layer_sizes)), adam_(adam) {
  if (layer_sizes_.size() < 2)
    throw std::invalid_argument("need at least input and output layer sizes");
  for (int s : layer_sizes_)
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");

  std::mt19937_64 rng(init_seed);
  layers_.resize(layer_sizes_.size() - 1);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    layer.in = layer_sizes_[l];
    layer.out = layer_sizes_[l + 1];
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.b.assign(layer.out, 0.0);
    const double limit = std::sqrt(6.0 / layer.in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : layer.w) w = dist(rng);
    layer.m_w.assign(layer.w.size(), 0.0);
    layer.v_w.assign(layer.w.size(), 0.0);
    layer.m_b.assign(layer.b.size(), 0.0);
    layer.v_b.assign(layer.b.size(), 0.0);
  }
}

void QNetwork::check_input(const std::vector<double>& x) const {
  if (layers_.empty()) throw std::logic_error("network not initialized");
  if (static_cast<int>(x.size()) != input_dim())
    throw std::invalid_argument("state vector has wrong dimension");
}

void QNetwork::forward(const std::vector<double>& x,
                       std::vector<double>& q) const {
  check_input(x);
  scratch_.resize(layers_.size() + 1);
  scratch_[0] = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const std::vector<double>& in = scratch_[l];
    std::vector<double>& out = (l + 1 == layers_.size()) ? q : scratch_[l + 1];
    out.assign(layer.out, 0.0);
    for (int j = 0; j < layer.out; ++j) out[j] = layer.b[j];
    for (int i = 0; i < layer.in; ++i) {
      const double xi = in[i];
      if (xi == 0.0) continue;
      const double* wrow = &layer.w[static_cast<std::size_t>(i) * layer.out];
      for (int j = 0; j < layer.out; ++j) out[j] += xi * wrow[j];
    }
    if (l + 1 < layers_.size())
      for (double& v : out)
        if (v < 0.0) v = 0.0;
  }
}

std::vector<double> QNetwork::forward(const std::vector<double>& x) const {
  std::vector<double> q;
  forward(x, q);
  return q;
}

void QNetwork::check_batch(const QBatch& batch) const {
  if (batch.states.empty()) throw std::invalid_argument("empty batch");
  if (batch.actions.size() != batch.states.size() ||
      batch.targets.size() != batch.states.size())
    throw std::invalid_argument("batch fields have mismatched lengths");
  for (double t : batch.targets)
    if (!std::isfinite(t)) throw std::invalid_argument("non-finite target");
  for (int a : batch.actions)
    if (a < 0 || a >= output_dim())
      throw std::invalid_argument("action index out of range");
}

double QNetwork::batch_loss(const QBatch& batch) const {
  check_batch(batch);
  double loss = 0.0;
  std::vector<double> q;
  for (std::size_t s = 0; s < batch.states.size(); ++s) {
    forward(batch.states[s], q);
    const double err = q[batch.actions[s]] - batch.targets[s];
    loss += err * err;
  }
  return loss / static_cast<double>(batch.states.size());
}

std::pair<double, std::vector<double>> QNetwork::gradients(
    const QBatch& batch) const {
  check_batch(batch);
  const std::size_t n_layers = layers_.size();
  std::vector<std::vector<double>> grad_w(n_layers), grad_b(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    grad_w[l].assign(layers_[l].w.size(), 0.0);
    grad_b[l].assign(layers_[l].b.size(), 0.0);
  }

  const double inv_n = 1.0 / static_cast<double>(batch.states.size());
  double loss = 0.0;
  std::vector<std::vector<double>> acts(n_layers + 1);
  std::vector<double> delta, delta_prev;

  for (std::size_t s = 0; s < batch.states.size(); ++s) {
    const std::vector<double>& x = batch.states[s];
    check_input(x);
    acts[0] = x;
    for (std::size_t l = 0; l < n_layers; ++l) {
      const Layer& layer = layers_[l];
      acts[l + 1].assign(layer.out, 0.0);
      for (int j = 0; j < layer.out; ++j) acts[l + 1][j] = layer.b[j];
      for (int i = 0; i < layer.in; ++i) {
        const double xi = acts[l][i];
        if (xi == 0.0) continue;
        const double* wrow = &layer.w[static_cast<std::size_t>(i) * layer.out];
        for (int j = 0; j < layer.out; ++j) acts[l + 1][j] += xi * wrow[j];
      }
      if (l + 1 < n_layers)
        for (double& v : acts[l + 1])
          if (v < 0.0) v = 0.0;
    }

    const int a = batch.actions[s];
    const double err = acts[n_layers][a] - batch.targets[s];
    loss += err * err * inv_n;

    // Only the selected output carries error.
    delta.assign(layers_.back().out, 0.0);
    delta[a] = 2.0 * err * inv_n;

    for (std::size_t l = n_layers; l-- > 0;) {
      const Layer& layer = layers_[l];
      for (int i = 0; i < layer.in; ++i) {
        const double xi = acts[l][i];
        if (xi == 0.0) continue;
        double* grow = &grad_w[l][static_cast<std::size_t>(i) * layer.out];
        for (int j = 0; j < layer.out; ++j) grow[j] += xi * delta[j];
      }
      for (int j = 0; j < layer.out; ++j) grad_b[l][j] += delta[j];
      if (l == 0) break;
      delta_prev.assign(layer.in, 0.0);
      for (int i = 0; i < layer.in; ++i) {
        if (acts[l][i] <= 0.0) continue;  // ReLU gate
        const double* wrow = &layer.w[static_cast<std::size_t>(i) * layer.out];
        double sum = 0.0;
        for (int j = 0; j < layer.out; ++j) sum += wrow[j] * delta[j];
        delta_prev[i] = sum;
      }
      delta.swap(delta_prev);
    }
  }

  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < n_layers; ++l) {
    flat.insert(flat.end(), grad_w[l].begin(), grad_w[l].end());
    flat.insert(flat.end(), grad_b[l].begin(), grad_b[l].end());
  }

  if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss");
  for (double g : flat)
    if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient");
  return {loss, std::move(flat)};
}

double QNetwork::train_step(const QBatch& batch, double clip_grad_norm) {
  auto [loss, grad] = gradients(batch);

  if (clip_grad_norm > 0.0) {
    double norm_sq = 0.0;
    for (double g : grad) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);
    if (norm > clip_grad_norm) {
      const double scale = clip_grad_norm / norm;
      for (double& g : grad) g *= scale;
    }
  }

  ++adam_steps_;
  const double bc1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(adam_steps_));
  const double bc2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(adam_steps_));

  std::size_t k = 0;
  auto update = [&](std::vector<double>& p, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i, ++k) {
      const double g = grad[k];
      m[i] = adam_.beta1 * m[i] + (1.0 - adam_.beta1) * g;
      v[i] = adam_.beta2 * v[i] + (1.0 - adam_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= adam_.learning_rate * m_hat / (std::sqrt(v_hat) + adam_.epsilon);
    }
  };
  for (Layer& layer : layers_) {
    update(layer.w, layer.m_w, layer.v_w);
    update(layer.b, layer.m_b, layer.v_b);
  }
  return loss;
}

void QNetwork::soft_update_from(const QNetwork& online, double tau) {
  if (tau <= 0.0 || tau > 1.0)
    throw std::invalid_argument("tau must be in (0, 1]");
  if (online.layer_sizes_ != layer_sizes_)
    throw std::invalid_argument("soft update between mismatched networks");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& t = layers_[l];
    const Layer& o = online.layers_[l];
    for (std::size_t i = 0; i < t.w.size(); ++i)
      t.w[i] = tau * o.w[i] + (1.0 - tau) * t.w[i];
    for (std::size_t i = 0; i < t.b.size(); ++i)
      t.b[i] = tau * o.b[i] + (1.0 - tau) * t.b[i];
  }
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

std::vector<double> QNetwork::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const Layer& l : layers_) {
    flat.insert(flat.end(), l.w.begin(), l.w.end());
    flat.insert(flat.end(), l.b.begin(), l.b.end());
  }
  return flat;
}

void QNetwork::set_parameters(const std::vector<double>& flat) {
  if (flat.size() != parameter_count())
    throw std::invalid_argument("parameter vector has wrong length");
  std::size_t k = 0;
  for (Layer& l : layers_) {
    for (double& w : l.w) w = flat[k++];
    for (double& b : l.b) b = flat[k++];
  }
}

void QNetwork::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(layer_sizes_.size()));
  for (int s : layer_sizes_) write_u32(os, static_cast<std::uint32_t>(s));
  write_f64(os, adam_.learning_rate);
  write_f64(os, adam_.beta1);
  write_f64(os, adam_.beta2);
  write_f64(os, adam_.epsilon);
  write_u64(os, adam_steps_);
  for (const Layer& l : layers_) {
    write_vec(os, l.w);
    write_vec(os, l.b);
    write_vec(os, l.m_w);
    write_vec(os, l.v_w);
    write_vec(os, l.m_b);
    write_vec(os, l.v_b);
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

QNetwork QNetwork::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + " is not a network snapshot");
  const std::uint32_t version = read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("unsupported snapshot version " +
                             std::to_string(version));
  const std::uint32_t n_sizes = read_u32(is);
  if (n_sizes < 2 || n_sizes > 64)
    throw std::runtime_error("corrupt snapshot header");
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) s = static_cast<int>(read_u32(is));

  QNetwork net;
  net.layer_sizes_ = sizes;
  net.adam_.learning_rate = read_f64(is);
  net.adam_.beta1 = read_f64(is);
  net.adam_.beta2 = read_f64(is);
  net.adam_.epsilon = read_f64(is);
  net.adam_steps_ = read_u64(is);
  net.layers_.resize(n_sizes - 1);
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    Layer& layer = net.layers_[l];
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.b.resize(layer.out);
    layer.m_w.resize(layer.w.size());
    layer.v_w.resize(layer.w.size());
    layer.m_b.resize(layer.b.size());
    layer.v_b.resize(layer.b.size());
    read_vec(is, layer.w);
    read_vec(is, layer.b);
    read_vec(is, layer.m_w);
    read_vec(is, layer.v_w);
    read_vec(is, layer.m_b);
    read_vec(is, layer.v_b);
  }
  if (!is) throw std::runtime_error("truncated snapshot " + path);
  return net;
}

}  // namespace ranxrl
