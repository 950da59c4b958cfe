#include "msgm/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace msgm::gaussian {

namespace {

void require_shape(const std::vector<std::vector<double>>& rows, std::size_t len, const char* what) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].size() != len) {
            throw std::invalid_argument(std::string(what) + " of source " + std::to_string(k + 1) + " has length " +
                                        std::to_string(rows[k].size()) + ", expected " + std::to_string(len));
        }
    }
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

void check_compatible(const GaussianFamily& a, const GaussianFamily& b, std::size_t nw) {
    if (a.K() != b.K() || a.d() != b.d()) throw std::invalid_argument("families differ in (K, d)");
    if (nw != a.K()) throw std::invalid_argument("weight count differs from K");
}

struct Sums {
    std::vector<std::vector<double>> per_source;  // K x d
    std::vector<double> global;                   // d
};

Sums coordinate_sums(const GaussianDataset& ds, std::size_t d1) {
    if (d1 > ds.width()) throw std::invalid_argument("d1 exceeds the observation dimension");
    for (std::size_t k = 0; k < ds.K(); ++k) {
        if (ds.counts()[k] == 0) throw std::invalid_argument("source " + std::to_string(k + 1) + " has no samples");
    }
    Sums s{std::vector<std::vector<double>>(ds.K(), std::vector<double>(ds.width(), 0.0)),
           std::vector<double>(ds.width(), 0.0)};
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto x = ds.observation(i);
        auto& acc = s.per_source[ds.label(i).index()];
        for (std::size_t j = 0; j < x.size(); ++j) {
            acc[j] += x[j];
            s.global[j] += x[j];
        }
    }
    return s;
}

}  // namespace

GaussianFamily::GaussianFamily(std::size_t d, Mode mode, std::vector<std::vector<double>> phi,
                               std::vector<std::vector<double>> psi)
    : d_(d), d1_(0), mode_(mode), phi_(std::move(phi)), psi_(std::move(psi)) {
    if (phi_.empty()) throw std::invalid_argument("family needs K >= 1");
    d1_ = phi_.front().size();
    if (d1_ > d_) throw std::invalid_argument("d1 exceeds d");
    require_shape(phi_, d1_, "phi");
    require_shape(psi_, d_ - d1_, "psi");
    if (mode_ == Mode::single_estimate && psi_.size() != phi_.size()) {
        throw std::invalid_argument("single-source estimate needs one psi per source");
    }
}

GaussianFamily GaussianFamily::truth(std::size_t d, std::vector<std::vector<double>> phi, std::vector<double> psi) {
    return GaussianFamily(d, Mode::truth, std::move(phi), {std::move(psi)});
}

GaussianFamily GaussianFamily::multi_estimate(std::size_t d, std::vector<std::vector<double>> phi,
                                              std::vector<double> psi) {
    return GaussianFamily(d, Mode::multi_estimate, std::move(phi), {std::move(psi)});
}

GaussianFamily GaussianFamily::single_estimate(std::size_t d, std::vector<std::vector<double>> phi,
                                               std::vector<std::vector<double>> psi) {
    return GaussianFamily(d, Mode::single_estimate, std::move(phi), std::move(psi));
}

const std::vector<double>& GaussianFamily::psi(SourceLabel y) const {
    y.check(K());
    return mode_ == Mode::single_estimate ? psi_[y.index()] : psi_.front();
}

std::vector<double> GaussianFamily::mean_of(SourceLabel y) const {
    y.check(K());
    std::vector<double> m = phi_[y.index()];
    const auto& s = psi(y);
    m.insert(m.end(), s.begin(), s.end());
    return m;
}

double GaussianFamily::max_abs_entry() const {
    double m = 0.0;
    for (const auto& rows : {phi_, psi_}) {
        for (const auto& r : rows) {
            for (double v : r) m = std::max(m, std::abs(v));
        }
    }
    return m;
}

GaussianFamily make_sim_family(std::size_t K, std::size_t d, double beta_sim) {
    if (K == 0 || d == 0) throw std::invalid_argument("make_sim_family needs K >= 1 and d >= 1");
    if (!(beta_sim >= 0.0 && beta_sim <= 1.0)) throw std::invalid_argument("beta_sim must lie in [0, 1]");
    const auto shared = static_cast<std::size_t>(std::floor(beta_sim * static_cast<double>(d)));
    const std::size_t d1 = d - shared;
    std::vector<std::vector<double>> phi;
    for (std::size_t k = 1; k <= K; ++k) phi.emplace_back(d1, static_cast<double>(k));
    return GaussianFamily::truth(d, std::move(phi), std::vector<double>(shared, 0.0));
}

GaussianDataset sample_dataset(const GaussianFamily& truth, const SourceWeights& w, std::size_t n, RngStream rng) {
    if (truth.mode() != Mode::truth) throw std::invalid_argument("sample_dataset needs a truth-mode family");
    if (w.K() != truth.K()) throw std::invalid_argument("weight count differs from K");
    GaussianDataset ds(truth.K(), truth.d());
    if (n == 0) return ds;
    ds.reserve(n);
    const auto labels = sample_labels(w, n, rng.fork(0));
    RngStream noise = rng.fork(1);
    std::vector<double> x(truth.d());
    for (const auto y : labels) {
        const auto mu = truth.mean_of(y);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = mu[j] + noise.normal();
        ds.push_back(x, y);
    }
    return ds;
}

GaussianFamily fit_multi(const GaussianDataset& ds, std::size_t d1) {
    const auto s = coordinate_sums(ds, d1);
    const std::size_t d = ds.width();
    std::vector<std::vector<double>> phi(ds.K());
    for (std::size_t k = 0; k < ds.K(); ++k) {
        const auto nk = static_cast<double>(ds.counts()[k]);
        for (std::size_t j = 0; j < d1; ++j) phi[k].push_back(s.per_source[k][j] / nk);
    }
    std::vector<double> psi;
    for (std::size_t j = d1; j < d; ++j) psi.push_back(s.global[j] / static_cast<double>(ds.size()));
    return GaussianFamily::multi_estimate(d, std::move(phi), std::move(psi));
}

GaussianFamily fit_single(const GaussianDataset& ds, std::size_t d1) {
    const auto s = coordinate_sums(ds, d1);
    const std::size_t d = ds.width();
    std::vector<std::vector<double>> phi(ds.K()), psi(ds.K());
    for (std::size_t k = 0; k < ds.K(); ++k) {
        const auto nk = static_cast<double>(ds.counts()[k]);
        for (std::size_t j = 0; j < d1; ++j) phi[k].push_back(s.per_source[k][j] / nk);
        for (std::size_t j = d1; j < d; ++j) psi[k].push_back(s.per_source[k][j] / nk);
    }
    return GaussianFamily::single_estimate(d, std::move(phi), std::move(psi));
}

double log_likelihood(const GaussianFamily& fam, const GaussianDataset& ds) {
    if (ds.width() != fam.d() || ds.K() != fam.K()) throw std::invalid_argument("dataset shape differs from family");
    const double norm = -0.5 * static_cast<double>(fam.d()) * std::log(2.0 * std::numbers::pi);
    std::vector<std::vector<double>> means;
    for (std::size_t k = 1; k <= fam.K(); ++k) means.push_back(fam.mean_of(SourceLabel(static_cast<int>(k))));
    double ll = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        ll += norm - 0.5 * sq_dist(ds.observation(i), means[ds.label(i).index()]);
    }
    return ll;
}

double tv_exact_pair(std::span<const double> mu_a, std::span<const double> mu_b) {
    if (mu_a.size() != mu_b.size()) throw std::invalid_argument("tv_exact_pair: length mismatch");
    // 2 Phi(r) - 1 = erf(r / sqrt 2) with r = |delta| / 2.
    return std::erf(std::sqrt(sq_dist(mu_a, mu_b)) / (2.0 * std::numbers::sqrt2));
}

double avg_tv_exact(const GaussianFamily& est, const GaussianFamily& truth, std::span<const double> weights) {
    check_compatible(est, truth, weights.size());
    double tv = 0.0;
    for (std::size_t k = 1; k <= est.K(); ++k) {
        const SourceLabel y(static_cast<int>(k));
        tv += weights[k - 1] * tv_exact_pair(est.mean_of(y), truth.mean_of(y));
    }
    return tv;
}

double avg_tv_exact(const GaussianFamily& est, const GaussianFamily& truth, const SourceWeights& w) {
    return avg_tv_exact(est, truth, w.values());
}

MonteCarloTv tv_monte_carlo_detail(const GaussianFamily& est, const GaussianFamily& truth, const SourceWeights& w,
                                   std::size_t n_test, RngStream rng) {
    check_compatible(est, truth, w.K());
    if (n_test == 0) throw std::invalid_argument("tv_monte_carlo needs n_test >= 1");
    std::vector<std::vector<double>> mu_hat, mu_star;
    for (std::size_t k = 1; k <= est.K(); ++k) {
        const SourceLabel y(static_cast<int>(k));
        mu_hat.push_back(est.mean_of(y));
        mu_star.push_back(truth.mean_of(y));
    }
    const auto labels = sample_labels(w, n_test, rng.fork(0));
    RngStream noise = rng.fork(1);
    std::vector<double> x(truth.d());
    double sum = 0.0, sum_sq = 0.0;
    for (const auto y : labels) {
        const auto& ms = mu_star[y.index()];
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = ms[j] + noise.normal();
        const double log_ratio = 0.5 * (sq_dist(x, ms) - sq_dist(x, mu_hat[y.index()]));
        const double term = 0.5 * std::abs(std::expm1(log_ratio));
        sum += term;
        sum_sq += term * term;
    }
    const auto n = static_cast<double>(n_test);
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n)};
}

double tv_monte_carlo(const GaussianFamily& est, const GaussianFamily& truth, const SourceWeights& w,
                      std::size_t n_test, RngStream rng) {
    return tv_monte_carlo_detail(est, truth, w, n_test, rng).estimate;
}

}  // namespace msgm::gaussian
