#include "msgm/arm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace msgm::arm {

namespace {

using testing::Fault;

double sigmoid(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

void check_sequence(const ArmConfig& cfg, std::span<const int> x, SourceLabel y) {
    if (x.size() != cfg.D) throw std::invalid_argument("sequence has length " + std::to_string(x.size()));
    for (int t : x) {
        if (t < 0 || static_cast<std::size_t>(t) >= cfg.M) {
            throw std::out_of_range("token " + std::to_string(t) + " outside [0, " + std::to_string(cfg.M) + ")");
        }
    }
    y.check(cfg.K);
}

// Scratch buffers for one sequence.
struct Workspace {
    std::vector<double> v, dv;
    std::vector<std::vector<double>> act;  // act[l] = input of layer l
    std::vector<std::vector<double>> pre;  // pre[l] = output of layer l
    std::vector<std::vector<double>> dpre;

    explicit Workspace(const ArmParams& p) : v(p.cfg.D), dv(p.cfg.D) {
        for (const auto& layer : p.mlp.layers) {
            act.emplace_back(layer.in, 0.0);
            pre.emplace_back(layer.out, 0.0);
            dpre.emplace_back(layer.out, 0.0);
        }
    }
};

const double* embedding_row(const ArmParams& p, std::span<const int> x, std::size_t y_index, std::size_t j) {
    const std::size_t de = p.cfg.de;
    if (j == 0) return p.VY.data() + y_index * de;
    return p.VX.data() + static_cast<std::size_t>(x[j - 1]) * de;
}

void encode(const ArmParams& p, std::span<const int> x, std::size_t y_index, Workspace& ws) {
    const std::size_t de = p.cfg.de;
    for (std::size_t j = 0; j < p.cfg.D; ++j) {
        ws.v[j] = sigmoid(p.b0[j] + dot(p.A0.data() + j * de, embedding_row(p, x, y_index, j), de));
    }
}

// Runs the MLP on (v_1..v_visible, 0, ..., 0); logits land in ws.pre.back().
void mlp_forward(const Mlp& mlp, std::span<const double> v, std::size_t visible, Workspace& ws) {
    auto& z = ws.act[0];
    std::fill(z.begin(), z.end(), 0.0);
    std::copy_n(v.begin(), visible, z.begin());
    const std::size_t L = mlp.layers.size();
    for (std::size_t l = 0; l < L; ++l) {
        const auto& layer = mlp.layers[l];
        const std::size_t cols = l == 0 ? visible : layer.in;
        const double* in = ws.act[l].data();
        auto& out = ws.pre[l];
        for (std::size_t r = 0; r < layer.out; ++r) {
            out[r] = layer.bias[r] + dot(layer.weight.data() + r * layer.in, in, cols);
        }
        if (l + 1 < L) {
            auto& next = ws.act[l + 1];
            for (std::size_t r = 0; r < layer.out; ++r) next[r] = std::max(out[r], 0.0);
        }
    }
}

// Backpropagates dpre.back() (already set) into grad and ws.dv.
void mlp_backward(const Mlp& mlp, std::size_t visible, Workspace& ws, Mlp& grad) {
    const std::size_t L = mlp.layers.size();
    for (std::size_t l = L; l-- > 0;) {
        const auto& layer = mlp.layers[l];
        auto& g = grad.layers[l];
        const auto& dp = ws.dpre[l];
        const auto& in = ws.act[l];
        const std::size_t cols = l == 0 ? visible : layer.in;
        for (std::size_t r = 0; r < layer.out; ++r) {
            const double d = dp[r];
            if (d == 0.0) continue;
            g.bias[r] += d;
            double* gw = g.weight.data() + r * layer.in;
            for (std::size_t c = 0; c < cols; ++c) gw[c] += d * in[c];
        }
        if (l > 0) {
            auto& dprev = ws.dpre[l - 1];
            const auto& prev_pre = ws.pre[l - 1];
            for (std::size_t c = 0; c < layer.in; ++c) {
                if (prev_pre[c] <= 0.0) {
                    dprev[c] = 0.0;
                    continue;
                }
                double s = 0.0;
                for (std::size_t r = 0; r < layer.out; ++r) s += layer.weight[r * layer.in + c] * dp[r];
                dprev[c] = s;
            }
        } else {
            for (std::size_t c = 0; c < visible; ++c) {
                double s = 0.0;
                for (std::size_t r = 0; r < layer.out; ++r) s += layer.weight[r * layer.in + c] * dp[r];
                ws.dv[c] += s;
            }
        }
    }
}

// Negative log-likelihood of one sequence; accumulates scale * gradient when grad is non-null.
double sequence_nll(const ArmParams& p, std::span<const int> x, std::size_t y_index, Workspace& ws, ArmParams* grad,
                    double scale) {
    const std::size_t D = p.cfg.D;
    const std::size_t de = p.cfg.de;
    encode(p, x, y_index, ws);
    if (grad) std::fill(ws.dv.begin(), ws.dv.end(), 0.0);
    double nll = 0.0;
    for (std::size_t d = 1; d <= D; ++d) {
        mlp_forward(p.mlp, ws.v, d, ws);
        const auto& logits = ws.pre.back();
        const double lse = log_sum_exp(logits);
        const auto target = static_cast<std::size_t>(x[d - 1]);
        nll += lse - logits[target];
        if (grad) {
            auto& dl = ws.dpre.back();
            for (std::size_t m = 0; m < logits.size(); ++m) dl[m] = scale * std::exp(logits[m] - lse);
            dl[target] -= scale;
            mlp_backward(p.mlp, d, ws, grad->mlp);
        }
    }
    if (grad) {
        for (std::size_t j = 0; j < D; ++j) {
            const double da = ws.dv[j] * ws.v[j] * (1.0 - ws.v[j]);
            if (da == 0.0) continue;
            const double* e = embedding_row(p, x, y_index, j);
            const double* a = p.A0.data() + j * de;
            double* ga = grad->A0.data() + j * de;
            double* ge = j == 0 ? grad->VY.data() + y_index * de
                                : grad->VX.data() + static_cast<std::size_t>(x[j - 1]) * de;
            grad->b0[j] += da;
            for (std::size_t c = 0; c < de; ++c) {
                ga[c] += da * e[c];
                ge[c] += da * a[c];
            }
        }
    }
    return nll;
}

void zero(ArmParams& g) {
    for (auto b : g.blocks()) std::fill(b.begin(), b.end(), 0.0);
}

std::vector<double> position_probs(const ArmParams& p, std::span<const int> x, SourceLabel y, std::size_t pos,
                                   Fault fault) {
    check_sequence(p.cfg, x, y);
    if (pos < 1 || pos > p.cfg.D) throw std::out_of_range("position outside [1, D]");
    Workspace ws(p);
    encode(p, x, y.index(), ws);
    const std::size_t visible = fault == Fault::mask_off_by_one ? std::min(pos + 1, p.cfg.D) : pos;
    mlp_forward(p.mlp, ws.v, visible, ws);
    const auto& z = ws.pre.back();
    if (fault != Fault::softmax_off_by_one) return softmax(z);
    std::vector<double> out(z.size());
    double s = 0.0;
    for (std::size_t m = 0; m + 1 < z.size(); ++m) s += std::exp(z[m]);
    for (std::size_t m = 0; m < z.size(); ++m) out[m] = std::exp(z[m]) / s;
    return out;
}

}  // namespace

void ArmConfig::validate() const {
    if (M < 2) throw std::invalid_argument("M must be >= 2");
    if (D < 1) throw std::invalid_argument("D must be >= 1");
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (de < 1) throw std::invalid_argument("de must be >= 1");
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    if (W < 1) throw std::invalid_argument("W must be >= 1");
}

std::size_t ArmConfig::mlp_parameter_count() const {
    if (L == 1) return D * M + M;
    return (D * W + W) + (L - 2) * (W * W + W) + (W * M + M);
}

std::size_t ArmConfig::parameter_count() const {
    return K * de + M * de + D * de + D + mlp_parameter_count();
}

std::size_t ArmConfig::support_size() const {
    std::size_t s = 1;
    for (std::size_t d = 0; d < D; ++d) {
        s *= M;
        if (s > kMaxSupport) {
            throw std::length_error("support M^D exceeds the enumeration guard of 2^21");
        }
    }
    return s;
}

ArmParams ArmParams::zeros(const ArmConfig& cfg) {
    cfg.validate();
    ArmParams p;
    p.cfg = cfg;
    p.VY.assign(cfg.K * cfg.de, 0.0);
    p.VX.assign(cfg.M * cfg.de, 0.0);
    p.A0.assign(cfg.D * cfg.de, 0.0);
    p.b0.assign(cfg.D, 0.0);
    std::vector<std::size_t> widths{cfg.D};
    for (std::size_t l = 1; l < cfg.L; ++l) widths.push_back(cfg.W);
    widths.push_back(cfg.M);
    p.mlp = make_mlp(widths);
    return p;
}

std::vector<std::span<double>> ArmParams::blocks() {
    std::vector<std::span<double>> b{VY, VX, A0, b0};
    for (auto& layer : mlp.layers) {
        b.emplace_back(layer.weight);
        b.emplace_back(layer.bias);
    }
    return b;
}

std::vector<std::span<const double>> ArmParams::blocks() const {
    std::vector<std::span<const double>> b{VY, VX, A0, b0};
    for (const auto& layer : mlp.layers) {
        b.emplace_back(layer.weight);
        b.emplace_back(layer.bias);
    }
    return b;
}

std::size_t ArmParams::size() const {
    std::size_t s = 0;
    for (auto b : blocks()) s += b.size();
    return s;
}

bool ArmParams::all_finite() const {
    for (auto b : blocks()) {
        for (double v : b) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

void ArmParams::axpy(double a, const ArmParams& g) {
    auto dst = blocks();
    const auto src = g.blocks();
    if (dst.size() != src.size()) throw std::invalid_argument("axpy: parameter shapes differ");
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (dst[i].size() != src[i].size()) throw std::invalid_argument("axpy: parameter shapes differ");
        for (std::size_t j = 0; j < dst[i].size(); ++j) dst[i][j] += a * src[i][j];
    }
}

ArmParams init_params(const ArmConfig& cfg, RngStream rng) {
    ArmParams p = ArmParams::zeros(cfg);
    for (auto& v : p.VY) v = rng.uniform();
    for (auto& v : p.VX) v = rng.uniform();
    const double a0 = 1.0 / std::sqrt(static_cast<double>(cfg.de));
    for (auto& v : p.A0) v = rng.uniform(-a0, a0);
    for (auto& v : p.b0) v = rng.uniform(-a0, a0);
    for (auto& layer : p.mlp.layers) {
        const double s = 1.0 / std::sqrt(static_cast<double>(layer.in));
        for (auto& v : layer.weight) v = rng.uniform(-s, s);
        for (auto& v : layer.bias) v = rng.uniform(-s, s);
    }
    return p;
}

std::vector<double> softmax(std::span<const double> logits) {
    // Shift by the max rather than the log-sum-exp: exp(0) stays exact for the leading entries.
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double s = 0.0;
    for (std::size_t m = 0; m < logits.size(); ++m) s += out[m] = std::exp(logits[m] - top);
    for (auto& v : out) v /= s;
    return out;
}

std::vector<double> forward_position(const ArmParams& p, std::span<const int> x, SourceLabel y, std::size_t pos) {
    return position_probs(p, x, y, pos, Fault::none);
}

double log_prob(const ArmParams& p, std::span<const int> x, SourceLabel y) {
    check_sequence(p.cfg, x, y);
    Workspace ws(p);
    return -sequence_nll(p, x, y.index(), ws, nullptr, 0.0);
}

ArmParams grad_nll(const ArmParams& p, const TokenDataset& ds, std::span<const std::size_t> indices) {
    if (indices.empty()) throw std::invalid_argument("grad_nll needs a nonempty batch");
    ArmParams g = ArmParams::zeros(p.cfg);
    Workspace ws(p);
    const double scale = 1.0 / static_cast<double>(indices.size());
    for (std::size_t i : indices) {
        const auto x = ds.observation(i);
        check_sequence(p.cfg, x, ds.label(i));
        sequence_nll(p, x, ds.label(i).index(), ws, &g, scale);
    }
    return g;
}

ArmParams grad_nll(const ArmParams& p, const TokenDataset& batch) {
    std::vector<std::size_t> idx(batch.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return grad_nll(p, batch, idx);
}

double mean_nll(const ArmParams& p, const TokenDataset& ds) {
    if (ds.empty()) throw std::invalid_argument("mean_nll of an empty dataset");
    Workspace ws(p);
    double s = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        check_sequence(p.cfg, ds.observation(i), ds.label(i));
        s += sequence_nll(p, ds.observation(i), ds.label(i).index(), ws, nullptr, 0.0);
    }
    return s / static_cast<double>(ds.size());
}

TrainResult train(const ArmParams& init, const TokenDataset& ds, const TrainOptions& opt, RngStream rng) {
    if (ds.empty()) throw std::invalid_argument("train needs a nonempty dataset");
    if (opt.batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    if (!(opt.lr >= 0.0) || !std::isfinite(opt.lr)) throw std::invalid_argument("learning rate must be finite and >= 0");
    TrainResult res{init, mean_nll(init, ds), 0.0};
    ArmParams& p = res.params;
    ArmParams g = ArmParams::zeros(p.cfg);
    Workspace ws(p);
    const double scale = 1.0 / static_cast<double>(opt.batch_size);
    for (std::size_t it = 0; it < opt.iters; ++it) {
        zero(g);
        double loss = 0.0;
        for (std::size_t b = 0; b < opt.batch_size; ++b) {
            const std::size_t i = rng.below(ds.size());
            loss += sequence_nll(p, ds.observation(i), ds.label(i).index(), ws, &g, scale);
        }
        if (!std::isfinite(loss)) {
            throw std::runtime_error("training diverged at iteration " + std::to_string(it) +
                                     ": batch loss " + std::to_string(loss * scale) + " (lr " +
                                     std::to_string(opt.lr) + ")");
        }
        p.axpy(-opt.lr, g);
    }
    if (!p.all_finite()) throw std::runtime_error("training produced non-finite parameters");
    res.final_nll = mean_nll(p, ds);
    if (!std::isfinite(res.final_nll)) throw std::runtime_error("training ended with a non-finite loss");
    return res;
}

std::size_t sequence_index(std::span<const int> x, std::size_t M) {
    std::size_t idx = 0;
    for (int t : x) idx = idx * M + static_cast<std::size_t>(t);
    return idx;
}

std::vector<int> sequence_at(std::size_t index, std::size_t M, std::size_t D) {
    std::vector<int> x(D);
    for (std::size_t d = D; d-- > 0;) {
        x[d] = static_cast<int>(index % M);
        index /= M;
    }
    return x;
}

std::vector<double> enumerate_distribution(const ArmParams& p, SourceLabel y) {
    const auto& cfg = p.cfg;
    const std::size_t N = cfg.support_size();
    y.check(cfg.K);
    const std::size_t de = cfg.de;
    // v_j for j >= 1 depends only on (j, token): tabulate.
    std::vector<double> vtab(cfg.D * cfg.M, 0.0);
    for (std::size_t j = 1; j < cfg.D; ++j) {
        for (std::size_t t = 0; t < cfg.M; ++t) {
            vtab[j * cfg.M + t] = sigmoid(p.b0[j] + dot(p.A0.data() + j * de, p.VX.data() + t * de, de));
        }
    }
    std::vector<double> v(cfg.D, 0.0);
    v[0] = sigmoid(p.b0[0] + dot(p.A0.data(), p.VY.data() + y.index() * de, de));
    std::vector<double> out(N, 0.0);
    Workspace ws(p);
    std::vector<double> logp(cfg.M);
    // Depth-first over prefixes; k tokens chosen so far.
    auto rec = [&](auto&& self, std::size_t k, std::size_t prefix, double lp) -> void {
        mlp_forward(p.mlp, v, k + 1, ws);
        const auto& z = ws.pre.back();
        const double lse = log_sum_exp(z);
        std::vector<double> lps(cfg.M);
        for (std::size_t t = 0; t < cfg.M; ++t) lps[t] = lp + z[t] - lse;
        for (std::size_t t = 0; t < cfg.M; ++t) {
            const std::size_t idx = prefix * cfg.M + t;
            if (k + 1 == cfg.D) {
                out[idx] = std::exp(lps[t]);
            } else {
                v[k + 1] = vtab[(k + 1) * cfg.M + t];
                self(self, k + 1, idx, lps[t]);
            }
        }
    };
    rec(rec, 0, 0, 0.0);
    return out;
}

std::vector<double> enumerate_distribution(const ForwardFn& fwd, const ArmParams& p, SourceLabel y) {
    const auto& cfg = p.cfg;
    const std::size_t N = cfg.support_size();
    std::vector<double> out(N, 0.0);
    std::vector<int> x(cfg.D, 0);
    auto rec = [&](auto&& self, std::size_t k, std::size_t prefix, double prob) -> void {
        std::fill(x.begin() + static_cast<std::ptrdiff_t>(k), x.end(), 0);
        const auto rho = fwd(p, x, y, k + 1);
        for (std::size_t t = 0; t < cfg.M; ++t) {
            x[k] = static_cast<int>(t);
            const std::size_t idx = prefix * cfg.M + t;
            if (k + 1 == cfg.D) {
                out[idx] = prob * rho[t];
            } else {
                self(self, k + 1, idx, prob * rho[t]);
            }
        }
    };
    rec(rec, 0, 0, 1.0);
    return out;
}

CategoricalTable::CategoricalTable(std::size_t M, std::size_t D, std::vector<double> probabilities)
    : M_(M), D_(D), p_(std::move(probabilities)) {
    const std::size_t N = ArmConfig{.M = M, .D = D}.support_size();
    if (p_.size() != N) throw std::invalid_argument("table size differs from M^D");
    double s = 0.0;
    for (double v : p_) {
        if (!(v >= 0.0)) throw std::invalid_argument("table has a negative or NaN entry");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("table sums to " + std::to_string(s));
}

std::vector<CategoricalTable> make_truth_tables(std::size_t K, std::size_t M, std::size_t D, double concentration,
                                                RngStream rng, double coupling) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (!(concentration > 0.0)) throw std::invalid_argument("concentration must be positive");
    if (!(coupling >= 0.0 && coupling <= 1.0)) throw std::invalid_argument("coupling must lie in [0, 1]");
    const std::size_t N = ArmConfig{.M = M, .D = D}.support_size();
    auto dirichlet = [&](RngStream r) {
        std::gamma_distribution<double> gamma(concentration, 1.0);
        std::vector<double> v(N);
        double s = 0.0;
        for (auto& x : v) s += (x = gamma(r));
        for (auto& x : v) x /= s;
        return v;
    };
    std::vector<double> shared;
    if (coupling > 0.0) shared = dirichlet(rng.fork(K + 1));
    std::vector<CategoricalTable> out;
    out.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        auto v = dirichlet(rng.fork(k));
        if (coupling > 0.0) {
            for (std::size_t i = 0; i < N; ++i) v[i] = (1.0 - coupling) * v[i] + coupling * shared[i];
        }
        out.emplace_back(M, D, std::move(v));
    }
    return out;
}

TokenDataset sample_sequences(const std::vector<CategoricalTable>& truths, const SourceWeights& w, std::size_t n,
                              RngStream rng) {
    if (truths.empty() || truths.size() != w.K()) throw std::invalid_argument("need one truth table per source");
    const std::size_t M = truths.front().M(), D = truths.front().D();
    TokenDataset ds(w.K(), D);
    if (n == 0) return ds;
    ds.reserve(n);
    std::vector<std::vector<double>> cdfs;
    for (const auto& t : truths) {
        if (t.M() != M || t.D() != D) throw std::invalid_argument("truth tables differ in (M, D)");
        std::vector<double> c(t.probabilities().size());
        std::partial_sum(t.probabilities().begin(), t.probabilities().end(), c.begin());
        cdfs.push_back(std::move(c));
    }
    const auto labels = sample_labels(w, n, rng.fork(0));
    RngStream draw = rng.fork(1);
    for (const auto y : labels) {
        const auto& c = cdfs[y.index()];
        const double u = draw.uniform() * c.back();
        auto idx = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
        idx = std::min(idx, c.size() - 1);
        ds.push_back(sequence_at(idx, M, D), y);
    }
    return ds;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("tv_distance: supports differ");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

double exact_avg_tv(std::span<const ArmParams> models, const std::vector<CategoricalTable>& truths,
                    const SourceWeights& w) {
    if (truths.size() != w.K()) throw std::invalid_argument("need one truth table per source");
    if (models.size() != 1 && models.size() != w.K()) throw std::invalid_argument("need 1 or K models");
    double tv = 0.0;
    for (std::size_t k = 0; k < w.K(); ++k) {
        const SourceLabel y(static_cast<int>(k + 1));
        const auto& m = models.size() == 1 ? models[0] : models[k];
        if (m.cfg.M != truths[k].M() || m.cfg.D != truths[k].D()) throw std::invalid_argument("supports differ");
        tv += w[y] * tv_distance(enumerate_distribution(m, y), truths[k].probabilities());
    }
    return tv;
}

namespace testing {

std::vector<double> forward_position_with_fault(const ArmParams& p, std::span<const int> x, SourceLabel y,
                                                std::size_t pos, Fault fault) {
    return position_probs(p, x, y, pos, fault);
}

}  // namespace testing

}  // namespace msgm::arm
