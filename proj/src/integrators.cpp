#include "cirsplit/integrators.hpp"

#include <array>
#include <cmath>

#include "cirsplit/errors.hpp"
#include "cirsplit/flows.hpp"

namespace cirsplit {

void TimeGrid::validate() const {
    if (n < 1 || a_sub < 1 || !(delta > 0.0)) throw config_error("invalid time grid");
}

ClampCounters& ClampCounters::operator+=(const ClampCounters& o) {
    eum_truncations += o.eum_truncations;
    radicand += o.radicand;
    perturbation += o.perturbation;
    inverse_map += o.inverse_map;
    return *this;
}

Eigen::MatrixXd Trajectory::observation_states() const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.n + 1), states.cols());
    for (std::size_t l = 0; l <= grid.n; ++l)
        out.row(static_cast<Eigen::Index>(l)) = states.row(static_cast<Eigen::Index>(l * grid.a_sub));
    return out;
}

std::string to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::EulerMaruyamaTruncate: return "eum-truncate";
        case SchemeKind::EulerMaruyamaAbs: return "eum-abs";
        case SchemeKind::SplitGenericLieTrotter: return "split-generic-lietrotter";
        case SchemeKind::SplitRepressilatorStrang: return "split-repressilator-strang";
        case SchemeKind::SplitLotkaVolterraStrang: return "split-lv-strang";
        case SchemeKind::SplitLotkaVolterraLieTrotter: return "split-lv-lietrotter";
        case SchemeKind::SplitTwoPoolLieTrotter: return "split-twopool-lietrotter";
        case SchemeKind::OdeCondLinearStrang: return "ode-condlinear-strang";
        case SchemeKind::OdeRk4: return "ode-rk4";
    }
    return "unknown";
}

SchemeKind scheme_from_string(const std::string& name) {
    for (SchemeKind k : {SchemeKind::EulerMaruyamaTruncate, SchemeKind::EulerMaruyamaAbs,
                         SchemeKind::SplitGenericLieTrotter, SchemeKind::SplitRepressilatorStrang,
                         SchemeKind::SplitLotkaVolterraStrang, SchemeKind::SplitLotkaVolterraLieTrotter,
                         SchemeKind::SplitTwoPoolLieTrotter, SchemeKind::OdeCondLinearStrang,
                         SchemeKind::OdeRk4})
        if (to_string(k) == name) return k;
    throw config_error("unknown scheme kind: " + name);
}

bool scheme_is_splitting(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::SplitGenericLieTrotter:
        case SchemeKind::SplitRepressilatorStrang:
        case SchemeKind::SplitLotkaVolterraStrang:
        case SchemeKind::SplitLotkaVolterraLieTrotter:
        case SchemeKind::SplitTwoPoolLieTrotter:
            return true;
        default:
            return false;
    }
}

bool scheme_is_deterministic(SchemeKind kind) {
    return kind == SchemeKind::OdeCondLinearStrang || kind == SchemeKind::OdeRk4;
}

Eigen::VectorXd eum_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                         const Parameters& theta, double h, std::span<const double> noise,
                         bool absolute_value, ClampCounters& clamps) {
    if (noise.size() != net.reaction_count()) throw config_error("eum_step: increment count");
    const Eigen::VectorXd a = evaluate_propensities(net, x, theta);
    Eigen::VectorXd next = x;
    const auto& nu = net.stoichiometry();
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double aj = a(j);
        const double sq = std::sqrt(aj);
        for (Eigen::Index i = 0; i < next.size(); ++i) {
            const int nu_ij = nu(i, j);
            if (nu_ij == 0) continue;
            next(i) += nu_ij * (aj * h + sq * noise[static_cast<std::size_t>(j)]);
        }
    }
    for (Eigen::Index i = 0; i < next.size(); ++i) {
        if (next(i) < 0.0) {
            next(i) = absolute_value ? -next(i) : 0.0;
            ++clamps.eum_truncations;
        }
    }
    return next;
}

namespace {

// Shared scalar kernel: perturb, sqrt (clamped), drift flow, noise flow,
// square. All composed flows evaluate in exactly this order so that the
// generic sweep and the hand-written model steps agree bitwise.
double component_step_raw(double x, double a_tilde, double b_tilde, std::span<const double> c_in,
                          std::span<const double> dw_in, double c_in_sq_sum,
                          std::span<const double> c_out, std::span<const double> dw_out, double h,
                          ClampCounters& clamps) {
    double perturbed = x;
    for (std::size_t k = 0; k < c_out.size(); ++k) perturbed += c_out[k] * dw_out[k];
    if (perturbed < 0.0) {
        perturbed = 0.0;
        ++clamps.perturbation;
    }
    const FlowValue drift = bernoulli_flow_core(std::sqrt(perturbed), a_tilde, b_tilde, c_in_sq_sum, h);
    if (drift.clamped) ++clamps.radicand;
    double z = drift.value;
    double s = 0.0;
    for (std::size_t k = 0; k < c_in.size(); ++k) s += c_in[k] * dw_in[k];
    z += 0.5 * s;
    return z * z;
}

} // namespace

Eigen::VectorXd generic_splitting_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                       const Parameters& theta, double h,
                                       std::span<const double> reaction_increments,
                                       std::span<const std::size_t> order, ClampCounters& clamps) {
    if (reaction_increments.size() != net.reaction_count())
        throw config_error("generic_splitting_step: increment count");
    const std::size_t d = net.species_count();
    Eigen::VectorXd state = x;
    std::array<double, 64> in_buf{}, out_buf{};
    std::vector<double> in_heap, out_heap;

    auto step_species = [&](std::size_t i) {
        const CondCirCoefficients coeffs = cond_cir_coefficients(net, state, theta, i);
        double* dw_in = in_buf.data();
        double* dw_out = out_buf.data();
        if (coeffs.r_in.size() > in_buf.size()) {
            in_heap.resize(coeffs.r_in.size());
            dw_in = in_heap.data();
        }
        if (coeffs.r_out.size() > out_buf.size()) {
            out_heap.resize(coeffs.r_out.size());
            dw_out = out_heap.data();
        }
        for (std::size_t k = 0; k < coeffs.r_in.size(); ++k) dw_in[k] = reaction_increments[coeffs.r_in[k]];
        for (std::size_t k = 0; k < coeffs.r_out.size(); ++k) dw_out[k] = reaction_increments[coeffs.r_out[k]];
        state(static_cast<Eigen::Index>(i)) = component_step_raw(
            state(static_cast<Eigen::Index>(i)), coeffs.a_tilde, coeffs.b_tilde,
            {coeffs.c_in.data(), coeffs.c_in.size()}, {dw_in, coeffs.r_in.size()},
            coeffs.c_in_sq_sum, {coeffs.c_out.data(), coeffs.c_out.size()},
            {dw_out, coeffs.r_out.size()}, h, clamps);
    };

    if (order.empty()) {
        for (std::size_t i = 0; i < d; ++i) step_species(i);
    } else {
        if (order.size() != d) throw config_error("species update order must be a permutation");
        for (std::size_t i : order) {
            if (i >= d) throw config_error("species update order out of range");
            step_species(i);
        }
    }
    return state;
}

Eigen::VectorXd generic_splitting_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                       const Parameters& theta, double h, RngStream& rng,
                                       std::span<const std::size_t> order, ClampCounters& clamps) {
    const double sd = std::sqrt(h);
    std::vector<double> increments(net.reaction_count());
    for (double& dw : increments) dw = rng.normal(0.0, sd);
    return generic_splitting_step(net, x, theta, h, increments, order, clamps);
}

namespace {

// Oscillator flows in merged-noise form. The transformed squared variable
// follows a linear equation solved by bernoulli_flow_core.

double repressilator_hill(double alpha, double kn, double n, double p) {
    return alpha * kn / (kn + std::pow(p, n));
}

double repressilator_mrna_flow(double m, double production, double tau, double dw,
                               ClampCounters& clamps) {
    const double u0 = m + production;
    const FlowValue drift = bernoulli_flow_core(std::sqrt(u0), 2.0 * production, 1.0, 1.0, tau);
    if (drift.clamped) ++clamps.radicand;
    const double z = drift.value + 0.5 * dw;
    double next = z * z - production;
    if (next < 0.0) {
        next = 0.0;
        ++clamps.inverse_map;
    }
    return next;
}

double repressilator_protein_flow(double p, double m, double beta, double tau, double dw,
                                  ClampCounters& clamps) {
    const double v0 = beta * (m + p);
    const FlowValue drift =
        bernoulli_flow_core(std::sqrt(v0), 2.0 * beta * beta * m, beta, beta * beta, tau);
    if (drift.clamped) ++clamps.radicand;
    const double z = drift.value + 0.5 * beta * dw;
    double next = (z * z - beta * m) / beta;
    if (next < 0.0) {
        next = 0.0;
        ++clamps.inverse_map;
    }
    return next;
}

} // namespace

Eigen::VectorXd repressilator_strang_kernel(const Eigen::VectorXd& x, const Parameters& theta,
                                            double h, std::span<const double> increments,
                                            ClampCounters& clamps) {
    if (x.size() != 6) throw config_error("repressilator state must have six components");
    if (increments.size() != 9) throw config_error("repressilator kernel needs nine increments");
    const double beta = theta[4];
    const double n = theta[3];
    const double kn = std::pow(theta[2], n);
    Eigen::VectorXd s = x;

    auto mrna_block = [&](double tau, std::span<const double> dw) {
        for (std::size_t i = 0; i < 3; ++i) {
            const double rep = s(static_cast<Eigen::Index>(2 * ((i + 2) % 3) + 1));
            const double production = theta[0] + repressilator_hill(theta[1], kn, n, rep);
            auto& m = s(static_cast<Eigen::Index>(2 * i));
            m = repressilator_mrna_flow(m, production, tau, dw[i], clamps);
        }
    };
    auto protein_block = [&](double tau, std::span<const double> dw) {
        for (std::size_t i = 0; i < 3; ++i) {
            const double m = s(static_cast<Eigen::Index>(2 * i));
            auto& p = s(static_cast<Eigen::Index>(2 * i + 1));
            p = repressilator_protein_flow(p, m, beta, tau, dw[i], clamps);
        }
    };

    mrna_block(0.5 * h, increments.subspan(0, 3));
    protein_block(h, increments.subspan(3, 3));
    mrna_block(0.5 * h, increments.subspan(6, 3));
    return s;
}

Eigen::VectorXd repressilator_strang_step(const Eigen::VectorXd& x, const Parameters& theta,
                                          double h, RngStream& rng, ClampCounters& clamps) {
    const double sd_half = std::sqrt(0.5 * h);
    const double sd_full = std::sqrt(h);
    std::array<double, 9> dw;
    for (int k = 0; k < 3; ++k) dw[static_cast<std::size_t>(k)] = rng.normal(0.0, sd_half);
    for (int k = 3; k < 6; ++k) dw[static_cast<std::size_t>(k)] = rng.normal(0.0, sd_full);
    for (int k = 6; k < 9; ++k) dw[static_cast<std::size_t>(k)] = rng.normal(0.0, sd_half);
    return repressilator_strang_kernel(x, theta, h, dw, clamps);
}

namespace {

double lv_prey_flow(double x1, double x2, const Parameters& theta, double tau, double dw1,
                    double dw2, ClampCounters& clamps) {
    const double b1 = -(theta[0] - theta[1] * x2);
    const std::array<double, 2> c_in{std::sqrt(theta[0]), -std::sqrt(theta[1] * x2)};
    const std::array<double, 2> dw{dw1, dw2};
    const double c_sq = c_in[0] * c_in[0] + c_in[1] * c_in[1];
    return component_step_raw(x1, 0.0, b1, c_in, dw, c_sq, {}, {}, tau, clamps);
}

double lv_predator_flow(double x2, double x1, const Parameters& theta, double tau, double dw2,
                        double dw3, ClampCounters& clamps) {
    const double b2 = -(theta[1] * x1 - theta[2]);
    const std::array<double, 2> c_in{std::sqrt(theta[1] * x1), -std::sqrt(theta[2])};
    const std::array<double, 2> dw{dw2, dw3};
    const double c_sq = c_in[0] * c_in[0] + c_in[1] * c_in[1];
    return component_step_raw(x2, 0.0, b2, c_in, dw, c_sq, {}, {}, tau, clamps);
}

} // namespace

Eigen::VectorXd lv_strang_kernel(const Eigen::VectorXd& x, const Parameters& theta, double h,
                                 std::span<const double> increments, ClampCounters& clamps) {
    if (x.size() != 2) throw config_error("predator-prey state must have two components");
    if (increments.size() != 6) throw config_error("lv kernel needs six increments");
    Eigen::VectorXd s = x;
    s(0) = lv_prey_flow(s(0), s(1), theta, 0.5 * h, increments[0], increments[1], clamps);
    s(1) = lv_predator_flow(s(1), s(0), theta, h, increments[2], increments[3], clamps);
    s(0) = lv_prey_flow(s(0), s(1), theta, 0.5 * h, increments[4], increments[5], clamps);
    return s;
}

Eigen::VectorXd lv_strang_step(const Eigen::VectorXd& x, const Parameters& theta, double h,
                               RngStream& rng, ClampCounters& clamps) {
    const double sd_half = std::sqrt(0.5 * h);
    const double sd_full = std::sqrt(h);
    std::array<double, 6> dw;
    dw[0] = rng.normal(0.0, sd_half);
    dw[1] = rng.normal(0.0, sd_half);
    dw[2] = rng.normal(0.0, sd_full);
    dw[3] = rng.normal(0.0, sd_full);
    dw[4] = rng.normal(0.0, sd_half);
    dw[5] = rng.normal(0.0, sd_half);
    return lv_strang_kernel(x, theta, h, dw, clamps);
}

Eigen::VectorXd lv_lietrotter_step(const Eigen::VectorXd& x, const Parameters& theta, double h,
                                   RngStream& rng, ClampCounters& clamps) {
    if (x.size() != 2) throw config_error("predator-prey state must have two components");
    const double sd = std::sqrt(h);
    const double dw1 = rng.normal(0.0, sd);
    const double dw2 = rng.normal(0.0, sd); // shared by both species
    const double dw3 = rng.normal(0.0, sd);
    Eigen::VectorXd s = x;
    s(0) = lv_prey_flow(s(0), s(1), theta, h, dw1, dw2, clamps);
    s(1) = lv_predator_flow(s(1), s(0), theta, h, dw2, dw3, clamps);
    return s;
}

Eigen::VectorXd twopool_lietrotter_kernel(const Eigen::VectorXd& x, const Parameters& theta,
                                          double h, std::span<const double> increments,
                                          ClampCounters& clamps) {
    if (x.size() != 2) throw config_error("two-pool state must have two components");
    if (increments.size() != 4) throw config_error("two-pool kernel needs four increments");
    Eigen::VectorXd s = x;

    // X1: decays through reactions 1 and 3, fed by reaction 4.
    {
        const double a1 = theta[3] * s(1);
        const double b1 = theta[0] + theta[2];
        const std::array<double, 2> c_in{-std::sqrt(theta[0]), -std::sqrt(theta[2])};
        const std::array<double, 2> dw_in{increments[0], increments[2]};
        const double c_sq = c_in[0] * c_in[0] + c_in[1] * c_in[1];
        const std::array<double, 1> c_out{std::sqrt(theta[3] * s(1))};
        const std::array<double, 1> dw_out{increments[3]};
        s(0) = component_step_raw(s(0), a1, b1, c_in, dw_in, c_sq, c_out, dw_out, h, clamps);
    }
    // X2: decays through reactions 2 and 4, fed by reaction 3; reads the
    // freshly updated X1 and reuses the shared increments.
    {
        const double a2 = theta[2] * s(0);
        const double b2 = theta[1] + theta[3];
        const std::array<double, 2> c_in{-std::sqrt(theta[1]), -std::sqrt(theta[3])};
        const std::array<double, 2> dw_in{increments[1], increments[3]};
        const double c_sq = c_in[0] * c_in[0] + c_in[1] * c_in[1];
        const std::array<double, 1> c_out{std::sqrt(theta[2] * s(0))};
        const std::array<double, 1> dw_out{increments[2]};
        s(1) = component_step_raw(s(1), a2, b2, c_in, dw_in, c_sq, c_out, dw_out, h, clamps);
    }
    return s;
}

Eigen::VectorXd twopool_lietrotter_step(const Eigen::VectorXd& x, const Parameters& theta,
                                        double h, RngStream& rng, ClampCounters& clamps) {
    const double sd = std::sqrt(h);
    std::array<double, 4> dw;
    for (auto& v : dw) v = rng.normal(0.0, sd);
    return twopool_lietrotter_kernel(x, theta, h, dw, clamps);
}

namespace {

void check_model_pairing(const ReactionNetwork& net, SchemeKind kind) {
    const ModelId id = net.model_id();
    const bool ok = (kind == SchemeKind::SplitRepressilatorStrang && id == ModelId::Repressilator) ||
                    ((kind == SchemeKind::SplitLotkaVolterraStrang ||
                      kind == SchemeKind::SplitLotkaVolterraLieTrotter) &&
                     id == ModelId::LotkaVolterra) ||
                    (kind == SchemeKind::SplitTwoPoolLieTrotter && id == ModelId::TwoPool);
    switch (kind) {
        case SchemeKind::SplitRepressilatorStrang:
        case SchemeKind::SplitLotkaVolterraStrang:
        case SchemeKind::SplitLotkaVolterraLieTrotter:
        case SchemeKind::SplitTwoPoolLieTrotter:
            if (!ok)
                throw config_error("scheme " + to_string(kind) + " requires its matching model");
            break;
        default:
            break;
    }
}

} // namespace

// Implemented in ode.cpp; declared here to avoid a header cycle.
Eigen::VectorXd ode_scheme_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                const Parameters& theta, double h, SchemeKind kind);

namespace {

class Stepper {
public:
    Stepper(const ReactionNetwork& net, const SchemeConfig& scheme, const Parameters& theta,
            double h)
        : net_(net), scheme_(scheme), theta_(theta), h_(h), rng_(scheme.rng_seed),
          eum_noise_(net.reaction_count()) {
        check_model_pairing(net, scheme.kind);
        if (!scheme.species_update_order.empty() &&
            scheme.kind != SchemeKind::SplitGenericLieTrotter)
            throw config_error("species update order applies to the generic splitting only");
    }

    Eigen::VectorXd advance(const Eigen::VectorXd& x, ClampCounters& clamps) {
        switch (scheme_.kind) {
            case SchemeKind::EulerMaruyamaTruncate:
            case SchemeKind::EulerMaruyamaAbs: {
                const double sd = std::sqrt(h_);
                for (double& dw : eum_noise_) dw = rng_.normal(0.0, sd);
                return eum_step(net_, x, theta_, h_, eum_noise_,
                                scheme_.kind == SchemeKind::EulerMaruyamaAbs, clamps);
            }
            case SchemeKind::SplitGenericLieTrotter:
                return generic_splitting_step(net_, x, theta_, h_, rng_,
                                              scheme_.species_update_order, clamps);
            case SchemeKind::SplitRepressilatorStrang:
                return repressilator_strang_step(x, theta_, h_, rng_, clamps);
            case SchemeKind::SplitLotkaVolterraStrang:
                return lv_strang_step(x, theta_, h_, rng_, clamps);
            case SchemeKind::SplitLotkaVolterraLieTrotter:
                return lv_lietrotter_step(x, theta_, h_, rng_, clamps);
            case SchemeKind::SplitTwoPoolLieTrotter:
                return twopool_lietrotter_step(x, theta_, h_, rng_, clamps);
            case SchemeKind::OdeCondLinearStrang:
            case SchemeKind::OdeRk4:
                return ode_scheme_step(net_, x, theta_, h_, scheme_.kind);
        }
        throw config_error("unhandled scheme kind");
    }

private:
    const ReactionNetwork& net_;
    const SchemeConfig& scheme_;
    const Parameters& theta_;
    double h_;
    RngStream rng_;
    std::vector<double> eum_noise_;
};

} // namespace

Trajectory simulate_path(const ReactionNetwork& net, const SchemeConfig& scheme,
                         const Eigen::VectorXd& x0, const Parameters& theta,
                         const TimeGrid& grid) {
    grid.validate();
    if (static_cast<std::size_t>(x0.size()) != net.species_count())
        throw config_error("initial state dimension does not match the network");
    for (Eigen::Index i = 0; i < x0.size(); ++i)
        if (x0(i) < 0.0) throw std::domain_error("initial state must be nonnegative");
    validate_parameters(net, theta);

    Trajectory traj;
    traj.grid = grid;
    const std::size_t steps = grid.fine_count();
    traj.states.resize(static_cast<Eigen::Index>(steps + 1), x0.size());
    traj.states.row(0) = x0.transpose();

    Stepper stepper(net, scheme, theta, grid.h());
    Eigen::VectorXd state = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        state = stepper.advance(state, traj.clamps);
        if (!state.allFinite()) {
            traj.diverged = true;
            for (std::size_t m = k; m < steps; ++m)
                traj.states.row(static_cast<Eigen::Index>(m + 1)) = state.transpose();
            return traj;
        }
        traj.states.row(static_cast<Eigen::Index>(k + 1)) = state.transpose();
    }
    return traj;
}

EndpointResult simulate_endpoint(const ReactionNetwork& net, const SchemeConfig& scheme,
                                 const Eigen::VectorXd& x0, const Parameters& theta, double h,
                                 std::size_t steps) {
    if (!(h > 0.0)) throw config_error("step size must be positive");
    validate_parameters(net, theta);
    Stepper stepper(net, scheme, theta, h);
    EndpointResult res;
    res.state = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        res.state = stepper.advance(res.state, res.clamps);
        if (!res.state.allFinite()) {
            res.diverged = true;
            return res;
        }
    }
    return res;
}

CheckpointResult simulate_checkpoints(const ReactionNetwork& net, const SchemeConfig& scheme,
                                      const Eigen::VectorXd& x0, const Parameters& theta,
                                      double h, std::span<const std::size_t> indices) {
    if (!(h > 0.0)) throw config_error("step size must be positive");
    if (indices.empty()) throw config_error("simulate_checkpoints: no indices");
    validate_parameters(net, theta);
    Stepper stepper(net, scheme, theta, h);

    CheckpointResult res;
    res.states.resize(static_cast<Eigen::Index>(indices.size()), x0.size());
    Eigen::VectorXd state = x0;
    std::size_t next = 0;
    const std::size_t last = indices.back();
    for (std::size_t k = 0; k <= last; ++k) {
        if (k > 0 && !res.diverged) {
            state = stepper.advance(state, res.clamps);
            if (!state.allFinite()) res.diverged = true;
        }
        while (next < indices.size() && indices[next] == k) {
            res.states.row(static_cast<Eigen::Index>(next)) = state.transpose();
            ++next;
        }
    }
    return res;
}

} // namespace cirsplit
