#include "msgm/bracketing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace msgm::bracketing {

namespace {

constexpr double kGridSlack = 1e-9;

void check_eps(double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

long grid_lo(double B, double eta) { return static_cast<long>(std::ceil(-B / eta - kGridSlack)); }
long grid_hi(double B, double eta) { return static_cast<long>(std::floor(B / eta + kGridSlack)); }

std::vector<double> random_input(std::size_t w, RngStream& rng) {
    std::vector<double> x(w);
    for (auto& v : x) v = rng.uniform();
    return x;
}

}  // namespace

GaussianBracketElement::GaussianBracketElement(std::size_t d, double B, double eps, bounds::Strategy strategy,
                                               std::vector<std::vector<double>> phi_bar,
                                               std::vector<std::vector<double>> psi_bar)
    : d_(d), d1_(0), B_(B), eps_(eps), eta_(0), c1_(0), c2_(0), strategy_(strategy),
      phi_bar_(std::move(phi_bar)), psi_bar_(std::move(psi_bar)) {
    check_eps(eps);
    if (!(B > 0.0)) throw std::invalid_argument("B must be positive");
    if (phi_bar_.empty()) throw std::invalid_argument("bracket element needs K >= 1");
    d1_ = phi_bar_.front().size();
    if (d1_ > d_) throw std::invalid_argument("d1 exceeds d");
    const std::size_t shared_rows = strategy == bounds::Strategy::multi ? 1 : phi_bar_.size();
    if (psi_bar_.size() != shared_rows) throw std::invalid_argument("wrong number of shared mean vectors");
    for (const auto& r : phi_bar_) {
        if (r.size() != d1_) throw std::invalid_argument("ragged source-specific means");
    }
    for (const auto& r : psi_bar_) {
        if (r.size() != d_ - d1_) throw std::invalid_argument("shared mean has wrong length");
    }
    const auto dd = static_cast<double>(d_);
    eta_ = eps_ / (1.0 + dd);
    c1_ = 1.0 - eta_;
    c2_ = dd * (1.0 - eta_) * eta_ / 2.0;
}

std::vector<double> GaussianBracketElement::mean_of(SourceLabel y) const {
    y.check(K());
    std::vector<double> m = phi_bar_[y.index()];
    const auto& s = strategy_ == bounds::Strategy::multi ? psi_bar_.front() : psi_bar_[y.index()];
    m.insert(m.end(), s.begin(), s.end());
    return m;
}

double GaussianBracketElement::log_density(std::span<const double> x, SourceLabel y) const {
    if (x.size() != d_) throw std::invalid_argument("probe has wrong dimension");
    const auto m = mean_of(y);
    return -0.5 * static_cast<double>(d_) * std::log(2.0 * std::numbers::pi) - 0.5 * c1_ * sq_dist(x, m) + c2_;
}

double GaussianBracketElement::exact_l1_gap() const {
    return std::expm1(-0.5 * static_cast<double>(d_) * std::log1p(-eta_) + c2_);
}

double snap_down(double v, double eta, double B) {
    const double q = v / eta;
    auto j = static_cast<long>(std::floor(q));
    if (q - static_cast<double>(j) > 1.0 - kGridSlack) ++j;  // v on the grid up to rounding
    // -B itself may be off-grid; the lowest in-box point then sits less than eta above v.
    j = std::clamp(j, grid_lo(B, eta), grid_hi(B, eta));
    return static_cast<double>(j) * eta;
}

gaussian::GaussianFamily random_target(std::size_t K, std::size_t d, std::size_t d1, double B, gaussian::Mode mode,
                                       RngStream& rng) {
    if (K < 1 || d < 1 || d1 > d) throw std::invalid_argument("invalid (K, d, d1)");
    auto vec = [&](std::size_t len) {
        std::vector<double> v(len);
        for (auto& x : v) x = rng.uniform(-B, B);
        return v;
    };
    std::vector<std::vector<double>> phi;
    for (std::size_t k = 0; k < K; ++k) phi.push_back(vec(d1));
    if (mode == gaussian::Mode::single_estimate) {
        std::vector<std::vector<double>> psi;
        for (std::size_t k = 0; k < K; ++k) psi.push_back(vec(d - d1));
        return gaussian::GaussianFamily::single_estimate(d, std::move(phi), std::move(psi));
    }
    if (mode == gaussian::Mode::multi_estimate) return gaussian::GaussianFamily::multi_estimate(d, std::move(phi), vec(d - d1));
    return gaussian::GaussianFamily::truth(d, std::move(phi), vec(d - d1));
}

GaussianBracketElement gaussian_bracket_cover(const gaussian::GaussianFamily& target, double B, double eps) {
    check_eps(eps);
    if (!(B > 0.0)) throw std::invalid_argument("B must be positive");
    if (target.max_abs_entry() > B) throw std::invalid_argument("target means lie outside [-B, B]");
    const double eta = eps / (1.0 + static_cast<double>(target.d()));
    const auto strategy = target.mode() == gaussian::Mode::single_estimate ? bounds::Strategy::single
                                                                          : bounds::Strategy::multi;
    auto snap = [&](std::vector<double> v) {
        for (double& x : v) x = snap_down(x, eta, B);
        return v;
    };
    std::vector<std::vector<double>> phi, psi;
    for (std::size_t k = 1; k <= target.K(); ++k) {
        const SourceLabel y(static_cast<int>(k));
        phi.push_back(snap(target.phi(y)));
        if (strategy == bounds::Strategy::single || k == 1) psi.push_back(snap(target.psi(y)));
    }
    return GaussianBracketElement(target.d(), B, eps, strategy, std::move(phi), std::move(psi));
}

BracketReport gaussian_bracket_verify(const GaussianBracketElement& elem, const gaussian::GaussianFamily& target,
                                      std::size_t n_probe, RngStream rng) {
    if (elem.K() != target.K() || elem.d() != target.d()) throw std::invalid_argument("element/target shape mismatch");
    BracketReport rep;
    rep.epsilon = elem.epsilon();
    rep.exact_l1_gap = elem.exact_l1_gap();
    const auto count = gaussian_bracket_count(elem.K(), elem.d(), elem.d1(), elem.B(), elem.epsilon(), elem.strategy());
    rep.log_cardinality = count.log_count;
    rep.cardinality_estimated = count.estimated;

    const std::size_t d = elem.d();
    // log p' - log p; the (2 pi)^(-d/2) factors cancel.
    auto check = [&](std::span<const double> x, const std::vector<double>& mu, const std::vector<double>& mbar) {
        const double a = 0.5 * sq_dist(x, mu);
        const double b = 0.5 * elem.c1() * sq_dist(x, mbar);
        const double diff = elem.c2() - b + a;
        ++rep.probes;
        if (diff < -1e-12 * std::max({1.0, a, b})) ++rep.dominance_violations;
    };

    std::vector<std::vector<double>> mus, mbars;
    for (std::size_t k = 1; k <= elem.K(); ++k) {
        const SourceLabel y(static_cast<int>(k));
        mus.push_back(target.mean_of(y));
        mbars.push_back(elem.mean_of(y));
    }
    std::vector<double> x(d);
    for (std::size_t k = 0; k < elem.K(); ++k) {
        const auto& mu = mus[k];
        const auto& mb = mbars[k];
        check(mu, mu, mb);
        check(mb, mu, mb);
        for (std::size_t j = 0; j < d; ++j) x[j] = 0.5 * (mu[j] + mb[j]);
        check(x, mu, mb);
        // Minimiser of log p' - log p.
        for (std::size_t j = 0; j < d; ++j) x[j] = mb[j] + (mu[j] - mb[j]) / elem.eta();
        check(x, mu, mb);
    }
    for (std::size_t i = 0; i < n_probe; ++i) {
        const std::size_t k = i % elem.K();
        for (std::size_t j = 0; j < d; ++j) x[j] = mus[k][j] + rng.normal();
        check(x, mus[k], mbars[k]);
    }
    return rep;
}

std::size_t grid_points_per_coordinate(double B, double eta) {
    if (!(B > 0.0 && eta > 0.0)) throw std::invalid_argument("grid needs B > 0 and eta > 0");
    std::size_t count = 0;
    for (long j = grid_lo(B, eta); j <= grid_hi(B, eta); ++j) ++count;
    return count;
}

BracketCount gaussian_bracket_count(std::size_t K, std::size_t d, std::size_t d1, double B, double eps,
                                    bounds::Strategy strategy) {
    check_eps(eps);
    if (K < 1 || d < 1 || d1 > d) throw std::invalid_argument("invalid (K, d, d1)");
    const double eta = eps / (1.0 + static_cast<double>(d));
    const std::size_t exponent = strategy == bounds::Strategy::multi ? K * d1 + (d - d1) : K * d;
    const double log_limit = std::log(kEnumerationLimit);
    // Formula estimate first so huge grids are never walked.
    if (static_cast<double>(exponent) * std::log(2.0 * B / eta + 1.0) > log_limit + 1.0) {
        return {static_cast<double>(exponent) * std::log(2.0 * B / eta + 1.0), true};
    }
    const auto g = static_cast<double>(grid_points_per_coordinate(B, eta));
    const double log_count = static_cast<double>(exponent) * std::log(g);
    if (log_count > log_limit) return {static_cast<double>(exponent) * std::log(2.0 * B / eta + 1.0), true};
    return {log_count, false};
}

std::vector<double> constant_function_bracket(double eps) {
    check_eps(eps);
    const auto levels = static_cast<std::size_t>(std::ceil(1.0 / eps - 1e-12));
    std::vector<double> out;
    out.reserve(levels);
    for (std::size_t k = 1; k <= levels; ++k) out.push_back(static_cast<double>(k) * eps);
    return out;
}

BracketReport constant_bracket_verify(double eps, std::size_t n_probe, RngStream rng) {
    const auto levels = constant_function_bracket(eps);
    BracketReport rep;
    rep.epsilon = eps;
    rep.log_cardinality = std::log(static_cast<double>(levels.size()));
    auto probe = [&](double c) {
        ++rep.probes;
        const auto it = std::lower_bound(levels.begin(), levels.end(), c);
        if (it == levels.end()) {
            ++rep.dominance_violations;
            return;
        }
        rep.exact_l1_gap = std::max(rep.exact_l1_gap, *it - c);
    };
    probe(0.0);
    probe(1.0);
    for (double l : levels) probe(std::min(1.0, l));
    for (std::size_t i = 0; i < n_probe; ++i) probe(rng.uniform());
    return rep;
}

EnergyGrid1D::EnergyGrid1D(std::vector<double> u_values) : u_(std::move(u_values)) {
    if (u_.size() < 3) throw std::invalid_argument("energy grid needs at least 3 nodes");
    for (double v : u_) {
        if (!std::isfinite(v)) throw std::invalid_argument("energy grid has a non-finite value");
    }
}

EnergyGrid1D EnergyGrid1D::piecewise_linear(std::size_t nodes, std::size_t knots, double lo, double hi,
                                            RngStream rng) {
    if (knots < 2) throw std::invalid_argument("piecewise-linear energy needs >= 2 knots");
    std::vector<double> kv(knots);
    for (auto& v : kv) v = rng.uniform(lo, hi);
    std::vector<double> u(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(nodes - 1) * static_cast<double>(knots - 1);
        const auto k = std::min(static_cast<std::size_t>(t), knots - 2);
        const double f = t - static_cast<double>(k);
        u[i] = (1.0 - f) * kv[k] + f * kv[k + 1];
    }
    return EnergyGrid1D(std::move(u));
}

double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) throw std::invalid_argument("trapezoid needs >= 2 nodes");
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

double ebm_gap_bound(double eps_u) {
    return 3.0 * eps_u * std::exp(4.0 * eps_u) + eps_u * std::exp(eps_u);
}

BracketReport ebm_bracket_from_energies(const EnergyGrid1D& u, std::span<const double> u_prime, double eps_u) {
    if (!(eps_u >= 0.0)) throw std::invalid_argument("eps_u must be >= 0");
    if (u_prime.size() != u.size()) throw std::invalid_argument("perturbed energy has wrong size");
    const auto uv = u.values();
    const std::size_t n = uv.size();
    if (sup_diff(uv, u_prime) > eps_u * (1.0 + 1e-12)) throw std::invalid_argument("|u - u'| exceeds eps_u");
    std::vector<double> eu(n), eup(n);
    for (std::size_t i = 0; i < n; ++i) {
        eu[i] = std::exp(-uv[i]);
        eup[i] = std::exp(-u_prime[i]);
    }
    const double z = trapezoid(eu, u.step());
    const double zp = trapezoid(eup, u.step());
    BracketReport rep;
    rep.epsilon = ebm_gap_bound(eps_u);
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = eu[i] / z;
        const double pp = eup[i] * std::exp(2.0 * eps_u) / zp;
        ++rep.probes;
        if (pp < p * (1.0 - 1e-12)) ++rep.dominance_violations;
        diff[i] = std::abs(pp - p);
    }
    rep.exact_l1_gap = trapezoid(diff, u.step());
    return rep;
}

BracketReport ebm_bracket_verify_1d(const EnergyGrid1D& u, double eps_u, RngStream rng) {
    if (!(eps_u >= 0.0)) throw std::invalid_argument("eps_u must be >= 0");
    const auto r = EnergyGrid1D::piecewise_linear(u.size(), 2 + rng.below(15), -1.0, 1.0, rng.fork(0));
    std::vector<double> up(u.size());
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = u.values()[i] + eps_u * r.values()[i];
    return ebm_bracket_from_energies(u, up, eps_u);
}

Mlp random_mlp(std::size_t L, std::size_t W, double B, RngStream& rng) {
    if (L < 1 || W < 1 || !(B > 0.0)) throw std::invalid_argument("random_mlp needs L, W >= 1 and B > 0");
    std::vector<std::size_t> widths(L + 1);
    for (auto& w : widths) w = 1 + rng.below(W);
    Mlp f = make_mlp(widths);
    auto draw = [&] { return rng.uniform() < 0.5 ? (rng.uniform() < 0.5 ? -B : B) : rng.uniform(-B, B); };
    for (auto& layer : f.layers) {
        for (auto& v : layer.weight) v = draw();
        for (auto& v : layer.bias) v = draw();
    }
    return f;
}

Mlp perturb_mlp(const Mlp& f, double delta, double B, RngStream& rng) {
    Mlp g = f;
    auto move = [&](double v) { return std::clamp(v + rng.uniform(-delta, delta), -B, B); };
    for (auto& layer : g.layers) {
        for (auto& v : layer.weight) v = move(v);
        for (auto& v : layer.bias) v = move(v);
    }
    return g;
}

double input_lipschitz_ratio(const Mlp& f, std::span<const double> x, std::span<const double> x_prime, double B,
                             std::size_t W) {
    const double dx = sup_diff(x, x_prime);
    if (dx == 0.0) return 0.0;
    const auto a = f.forward_layers(x);
    const auto b = f.forward_layers(x_prime);
    double ratio = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        const double bound = std::pow(B * static_cast<double>(W), static_cast<double>(l + 1)) * dx;
        ratio = std::max(ratio, sup_diff(a[l], b[l]) / bound);
    }
    return ratio;
}

double param_lipschitz_ratio(const Mlp& f, const Mlp& g, std::span<const double> x, double delta, double B,
                             std::size_t W) {
    const auto a = f.forward_layers(x);
    const auto b = g.forward_layers(x);
    double ratio = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        const double diff = sup_diff(a[l], b[l]);
        if (diff == 0.0) continue;
        const auto ll = static_cast<double>(l + 1);
        const double bound = ll * std::pow(std::max(B, 1.0), ll - 1.0) * std::pow(static_cast<double>(W) + 1.0, ll) * delta;
        ratio = std::max(ratio, diff / bound);
    }
    return ratio;
}

double output_supnorm_ratio(const Mlp& f, std::span<const double> x, double B, std::size_t W) {
    const auto a = f.forward_layers(x);
    double ratio = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        const auto ll = static_cast<double>(l + 1);
        const double bound = std::pow(std::max(B, 1.0) * (static_cast<double>(W) + 1.0), ll);
        ratio = std::max(ratio, sup_norm(a[l]) / bound);
    }
    return ratio;
}

double mlp_lemma_check(LemmaKind kind, std::size_t L, std::size_t W, double B, std::size_t trials, RngStream rng) {
    if (trials < 1) throw std::invalid_argument("mlp_lemma_check needs trials >= 1");
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        RngStream r = rng.fork(t);
        const Mlp f = random_mlp(L, W, B, r);
        const auto x = random_input(f.input_width(), r);
        double ratio = 0.0;
        switch (kind) {
            case LemmaKind::input_lipschitz: {
                auto xp = x;
                // Below ~1e-3 the difference quotient is dominated by cancellation error, not by the network.
                const double scale = std::pow(10.0, -3.0 * r.uniform());
                for (auto& v : xp) v = std::clamp(v + scale * r.uniform(-1.0, 1.0), 0.0, 1.0);
                ratio = input_lipschitz_ratio(f, x, xp, B, W);
                break;
            }
            case LemmaKind::param_lipschitz: {
                const double delta = B * r.uniform();
                const Mlp g = perturb_mlp(f, delta, B, r);
                ratio = delta > 0.0 ? param_lipschitz_ratio(f, g, x, delta, B, W) : 0.0;
                break;
            }
            case LemmaKind::output_supnorm:
                ratio = output_supnorm_ratio(f, x, B, W);
                break;
        }
        worst = std::max(worst, ratio);
    }
    return worst;
}

}  // namespace msgm::bracketing
