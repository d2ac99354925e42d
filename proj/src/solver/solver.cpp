#include "solver/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>

#include "core/errors.hpp"
#include "core/fft.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace kinetic {

// ---------------------------------------------------------------------------
// norms

double weighted_norm2_sq(const std::vector<double>& f, const PhaseGrid& grid) {
    const std::size_t Nv = grid.num_v_cells();
    const auto& pot = grid.potential_values();
    double acc = 0.0;
    for (std::size_t ix : grid.inside_x()) {
        const double ev = pot.empty() ? 1.0 : std::exp(pot[ix]);
        double col = 0.0;
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const double v = f[ix * Nv + iv];
            col += v * v / grid.maxwellian_h(iv);
        }
        acc += grid.w_cell() * ev * col;
    }
    return acc;
}

double weighted_norm_inf(const std::vector<double>& f, const PhaseGrid& grid) {
    const std::size_t Nv = grid.num_v_cells();
    const auto& pot = grid.potential_values();
    double m = 0.0;
    for (std::size_t ix : grid.inside_x()) {
        const double ev = pot.empty() ? 1.0 : std::exp(pot[ix]);
        for (std::size_t iv = 0; iv < Nv; ++iv)
            m = std::max(m, std::abs(f[ix * Nv + iv]) * ev / grid.maxwellian_h(iv));
    }
    return m;
}

double weighted_inner(const std::vector<double>& f, const std::vector<double>& g, const PhaseGrid& grid) {
    const std::size_t Nv = grid.num_v_cells();
    const auto& pot = grid.potential_values();
    double acc = 0.0;
    for (std::size_t ix : grid.inside_x()) {
        const double ev = pot.empty() ? 1.0 : std::exp(pot[ix]);
        double col = 0.0;
        for (std::size_t iv = 0; iv < Nv; ++iv)
            col += f[ix * Nv + iv] * g[ix * Nv + iv] / grid.maxwellian_h(iv);
        acc += grid.w_cell() * ev * col;
    }
    return acc;
}

double field_mass(const std::vector<double>& f, const PhaseGrid& grid) {
    const std::size_t Nv = grid.num_v_cells();
    double acc = 0.0;
    for (std::size_t ix : grid.inside_x()) {
        double col = 0.0;
        for (std::size_t iv = 0; iv < Nv; ++iv) col += f[ix * Nv + iv];
        acc += grid.w_cell() * col;
    }
    return acc;
}

double bgk_norm2_sq(const std::vector<double>& f, const BgkEquilibrium& eq, const PhaseGrid& grid) {
    const std::size_t Nv = grid.num_v_cells();
    double acc = 0.0;
    for (std::size_t ix : grid.inside_x())
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const std::size_t i = ix * Nv + iv;
            acc += grid.w_cell() * f[i] * f[i] / eq.F[i];
        }
    return acc;
}

// ---------------------------------------------------------------------------
// collision backends

CollisionBackend collision_backend(const BoundKernel& kernel) {
    CollisionBackend b;
    b.apply = [&kernel](const std::vector<double>& f, std::vector<double>& out) {
        kernel.apply_collision(f, out);
    };
    b.gain = [&kernel](const std::vector<double>& f, std::vector<double>& out) {
        kernel.apply_gain(f, out);
    };
    b.loss_rate = [&kernel](const Vec& x, const Vec& v) { return kernel.b_continuous(x, v); };
    b.dissipation = [&kernel](const std::vector<double>& f) { return kernel.dissipation(f); };
    b.max_rate = kernel.max_b();
    b.name = kernel.spec().name();
    return b;
}

CollisionBackend bgk_backend(const Profile& sigma, const BgkEquilibrium& eq, const PhaseGrid& grid,
                             double sigma_max) {
    CollisionBackend b;
    b.apply = [&sigma, &eq, &grid](const std::vector<double>& f, std::vector<double>& out) {
        bgk_apply(sigma, eq, grid, f, out);
    };
    b.gain = [&sigma, &eq, &grid](const std::vector<double>& f, std::vector<double>& out) {
        const std::size_t Nv = grid.num_v_cells();
        out.assign(grid.num_cells(), 0.0);
        for (std::size_t ix : grid.inside_x()) {
            const double s = sigma(grid.x_center(ix), grid.domain());
            double rho = 0.0;
            for (std::size_t iv = 0; iv < Nv; ++iv) rho += grid.w_v() * f[ix * Nv + iv];
            const double c = s * rho / eq.rho_F[ix];
            for (std::size_t iv = 0; iv < Nv; ++iv) out[ix * Nv + iv] = c * eq.F[ix * Nv + iv];
        }
    };
    b.loss_rate = [&sigma, &grid](const Vec& x, const Vec&) { return sigma(x, grid.domain()); };
    b.dissipation = [&sigma, &eq, &grid](const std::vector<double>& f) {
        return bgk_dissipation(sigma, eq, grid, f);
    };
    b.max_rate = sigma_max;
    b.name = "bgk";
    return b;
}

// ---------------------------------------------------------------------------
// transport plans

namespace {

struct Stencil {
    std::int32_t bx[2] = {0, 0};
    std::int32_t bv[2] = {0, 0};
    float fx[2] = {0, 0};
    float fv[2] = {0, 0};
};

State backtrace(const PhaseGrid& grid, const PotentialSpec& pot, const State& z, double dt, double h,
                bool* aborted) {
    const DomainSpec& dom = grid.domain();
    if (pot.is_zero() && !dom.bounded()) {
        State s = z;
        for (int a = 0; a < dom.dim(); ++a) s.x[a] = z.x[a] - dt * z.v[a];
        s.x = dom.canonicalize(s.x);
        s.t = -dt;
        if (aborted) *aborted = false;
        return s;
    }
    TraceOptions opts;
    opts.backward = true;
    opts.sample_dt = dt;  // endpoint only
    TrajectoryRecord rec = trace(z, pot, dom, dt, h, opts);
    if (aborted) *aborted = rec.status != TraceStatus::Completed;
    return rec.samples.back();
}

class TransportPlan {
public:
    TransportPlan(const PhaseGrid& grid, const PotentialSpec& pot, Interp interp, double dt,
                  double substep, int threads)
        : grid_(grid), interp_(interp), dt_(dt), threads_(threads) {
        const int d = grid.dim();
        const std::size_t Nv = grid.num_v_cells();
        if (interp_ == Interp::Spectral) {
            if (d != 1) throw ConfigError("spectral transport supports d=1 only");
            shifts_.resize(Nv);
            for (std::size_t iv = 0; iv < Nv; ++iv)
                shifts_[iv] = grid.v_center(iv)[0] * dt / grid.dx();
            return;
        }
        if (interp_ == Interp::Cubic && grid.domain().bounded())
            throw ConfigError("cubic transport is limited to the torus; bounded domains use linear");

        stencils_.resize(grid.num_cells());
        const auto& cols = grid.inside_x();
        parallel_for(cols.size(), threads_, [&](std::size_t b, std::size_t e, std::size_t) {
            for (std::size_t c = b; c < e; ++c) {
                const std::size_t ix = cols[c];
                for (std::size_t iv = 0; iv < Nv; ++iv) {
                    State z;
                    z.x = grid.x_center(ix);
                    z.v = grid.v_center(iv);
                    bool aborted = false;
                    const State foot = backtrace(grid, pot, z, dt, substep, &aborted);
                    if (aborted) ++n_aborted_;
                    Stencil st;
                    for (int a = 0; a < d; ++a) {
                        const double u = (foot.x[a] - grid.x_lo()[a]) / grid.dx() - 0.5;
                        const double fl = std::floor(u);
                        st.bx[a] = static_cast<std::int32_t>(fl);
                        st.fx[a] = static_cast<float>(u - fl);
                        const double uv = (foot.v[a] + grid.v_max()) / grid.dv() - 0.5;
                        const double flv = std::floor(uv);
                        st.bv[a] = static_cast<std::int32_t>(flv);
                        st.fv[a] = static_cast<float>(uv - flv);
                    }
                    stencils_[ix * Nv + iv] = st;
                }
            }
        });
    }

    std::size_t aborted_feet() const { return n_aborted_; }

    void apply(const std::vector<double>& src, std::vector<double>& dst) const {
        const std::size_t Nv = grid_.num_v_cells();
        dst.assign(grid_.num_cells(), 0.0);
        if (interp_ == Interp::Spectral) {
            const std::size_t nx = grid_.num_x_cells();
            parallel_for(Nv, threads_, [&](std::size_t b, std::size_t e, std::size_t) {
                FourierShifter shifter(nx);
                std::vector<double> row(nx), out(nx);
                for (std::size_t iv = b; iv < e; ++iv) {
                    for (std::size_t ix = 0; ix < nx; ++ix) row[ix] = src[ix * Nv + iv];
                    shifter.shift(row.data(), out.data(), shifts_[iv]);
                    for (std::size_t ix = 0; ix < nx; ++ix) dst[ix * Nv + iv] = out[ix];
                }
            });
            return;
        }
        const auto& cols = grid_.inside_x();
        if (interp_ == Interp::Linear) {
            parallel_for(cols.size(), threads_, [&](std::size_t b, std::size_t e, std::size_t) {
                for (std::size_t c = b; c < e; ++c) apply_linear_column(src, dst, cols[c]);
            });
        } else {
            parallel_for(cols.size(), threads_, [&](std::size_t b, std::size_t e, std::size_t) {
                for (std::size_t c = b; c < e; ++c) apply_cubic_column(src, dst, cols[c]);
            });
        }
    }

private:
    int wrap_x(int i) const {
        const int n = grid_.nx();
        if (grid_.domain().kind() == DomainKind::Torus) return ((i % n) + n) % n;
        return i;  // bounded: validity checked by the caller
    }

    void apply_linear_column(const std::vector<double>& src, std::vector<double>& dst,
                             std::size_t ix) const {
        const int d = grid_.dim();
        const std::size_t Nv = grid_.num_v_cells();
        const bool bounded = grid_.domain().bounded();
        const int nx = grid_.nx(), nv = grid_.nv();
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const Stencil& st = stencils_[ix * Nv + iv];
            double acc = 0.0, wsum = 0.0;
            const int ntap = 1 << (2 * d);
            for (int tap = 0; tap < ntap; ++tap) {
                double w = 1.0;
                int xi[2] = {0, 0}, vi[2] = {0, 0};
                bool ok = true;
                for (int a = 0; a < d; ++a) {
                    const int off = (tap >> a) & 1;
                    xi[a] = wrap_x(st.bx[a] + off);
                    w *= off ? st.fx[a] : 1.0 - st.fx[a];
                    if (bounded && (xi[a] < 0 || xi[a] >= nx)) ok = false;
                }
                for (int a = 0; a < d; ++a) {
                    const int off = (tap >> (d + a)) & 1;
                    vi[a] = st.bv[a] + off;
                    w *= off ? st.fv[a] : 1.0 - st.fv[a];
                    if (vi[a] < 0 || vi[a] >= nv) ok = false;
                }
                if (!ok || w == 0.0) continue;
                const std::size_t sx = grid_.x_linear(xi);
                if (bounded && !grid_.x_inside(sx)) continue;
                wsum += w;
                acc += w * src[sx * Nv + grid_.v_linear(vi)];
            }
            // renormalize when wall/box clipping removed taps (preserves constants)
            dst[ix * Nv + iv] = wsum > 1e-12 ? acc / wsum : 0.0;
        }
    }

    static void cubic_weights(double f, double* w) {
        w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
        w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0;
        w[3] = (f + 1.0) * f * (f - 1.0) / 6.0;
    }

    void apply_cubic_column(const std::vector<double>& src, std::vector<double>& dst,
                            std::size_t ix) const {
        // d = 1 tensor 4x4 Lagrange stencil (torus x, clipped v)
        const std::size_t Nv = grid_.num_v_cells();
        const int nv = grid_.nv();
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const Stencil& st = stencils_[ix * Nv + iv];
            double wx[4], wv[4];
            cubic_weights(st.fx[0], wx);
            cubic_weights(st.fv[0], wv);
            double acc = 0.0;
            for (int a = 0; a < 4; ++a) {
                const int xi = wrap_x(st.bx[0] + a - 1);
                double rowacc = 0.0;
                for (int b = 0; b < 4; ++b) {
                    const int vi = st.bv[0] + b - 1;
                    if (vi < 0 || vi >= nv) continue;
                    rowacc += wv[b] * src[static_cast<std::size_t>(xi) * Nv + vi];
                }
                acc += wx[a] * rowacc;
            }
            dst[ix * Nv + iv] = acc;
        }
    }

    const PhaseGrid& grid_;
    Interp interp_;
    double dt_;
    int threads_;
    std::vector<Stencil> stencils_;
    std::vector<double> shifts_;
    std::size_t n_aborted_ = 0;
};

/// att[cell] = exp(-dt_total * b(phi_{-dt_total/2}(z))), the spec'd midpoint quadrature of the loss integral.
std::vector<double> build_attenuation(const PhaseGrid& grid, const PotentialSpec& pot,
                                      const std::function<double(const Vec&, const Vec&)>& loss_rate,
                                      double dt_total, double substep, int threads) {
    std::vector<double> att(grid.num_cells(), 1.0);
    const std::size_t Nv = grid.num_v_cells();
    const auto& cols = grid.inside_x();
    parallel_for(cols.size(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t c = b; c < e; ++c) {
            const std::size_t ix = cols[c];
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                State z;
                z.x = grid.x_center(ix);
                z.v = grid.v_center(iv);
                const State mid = backtrace(grid, pot, z, 0.5 * dt_total, substep, nullptr);
                att[ix * Nv + iv] =
                    std::exp(-dt_total * loss_rate(grid.domain().canonicalize(mid.x), mid.v));
            }
        }
    });
    return att;
}

} // namespace

// ---------------------------------------------------------------------------
// evolve

namespace {

/// Conservative midpoint collision substep f <- f + tau C[f + (tau/2) C[f]].
void collision_substep(const CollisionBackend& backend, double tau, std::vector<double>& f,
                       std::vector<double>& scratch1, std::vector<double>& scratch2) {
    backend.apply(f, scratch1);
    scratch2.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) scratch2[i] = f[i] + 0.5 * tau * scratch1[i];
    backend.apply(scratch2, scratch1);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += tau * scratch1[i];
}

} // namespace

EvolutionSeries evolve(const std::vector<double>& f0, const EvolveSetup& setup, const SolverOptions& opts) {
    const PhaseGrid& grid = *setup.grid;
    const PotentialSpec& pot = *setup.pot;
    if (f0.size() != grid.num_cells()) throw ContractError("evolve: field/grid shape mismatch");
    if (!(opts.dt > 0) || !(opts.T > 0)) throw ConfigError("evolve: dt and T must be positive");

    // interpolation stability gate (semi-Lagrangian is unconditionally stable;
    // the guard bounds the interpolation foot distance as the spec requires)
    if (opts.interp != Interp::Spectral) {
        if (grid.v_max() * opts.dt > grid.dx() * opts.interp_safety)
            throw ConfigError("evolve: |v_max| dt exceeds dx * interp_safety (raise interp_safety for "
                              "long semi-Lagrangian steps)");
    } else {
        if (!pot.is_zero() || grid.domain().bounded())
            throw ConfigError("evolve: spectral transport requires V=0 on the torus");
    }
    if (setup.collision.max_rate * opts.dt > 1.0)
        throw ConfigError("evolve: dt * max collision rate exceeds 1; reduce dt");

    double substep = opts.flow_substep;
    if (substep <= 0) {
        if (pot.is_zero() && !grid.domain().bounded()) {
            substep = opts.dt;
        } else if (grid.domain().bounded()) {
            substep = std::min(opts.dt, 0.25 * grid.dx() / std::max(1.0, grid.v_max()));
        } else {
            substep = std::min(opts.dt, 1e-3);
        }
    }

    TransportPlan plan(grid, pot, opts.interp, opts.dt, substep, opts.threads);
    std::unique_ptr<TransportPlan> plan_half;
    std::vector<double> att_full, att_half;
    if (opts.scheme == Scheme::DuhamelSL) {
        plan_half = std::make_unique<TransportPlan>(grid, pot, opts.interp, 0.5 * opts.dt, substep,
                                                    opts.threads);
        att_full = build_attenuation(grid, pot, setup.collision.loss_rate, opts.dt, substep, opts.threads);
        att_half =
            build_attenuation(grid, pot, setup.collision.loss_rate, 0.5 * opts.dt, substep, opts.threads);
    }

    EvolutionSeries series;
    series.scheme_name = opts.scheme == Scheme::Strang ? "strang" : "duhamel_sl";
    series.interp_name = opts.interp == Interp::Linear   ? "linear"
                         : opts.interp == Interp::Cubic  ? "cubic"
                                                         : "spectral";

    std::vector<double> f = f0;
    std::vector<double> fprev, ftilde, gain, pulled, gpulled, s1, s2, diff;
    const double out_dt = opts.output_dt > 0 ? opts.output_dt : 10.0 * opts.dt;
    const long nsteps = static_cast<long>(std::llround(opts.T / opts.dt));
    const long out_every = std::max<long>(1, static_cast<long>(std::llround(out_dt / opts.dt)));

    series.initial_mass = field_mass(f, grid);
    series.initial_norm2_sq = setup.norm2_sq(f);

    auto record = [&](double t, long step) {
        diff.resize(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) diff[i] = f[i] - setup.equilibrium[i];
        const double dist = std::sqrt(std::max(0.0, setup.norm2_sq(diff)));
        const double n2 = setup.norm2_sq(f);
        if (!std::isfinite(n2) || !std::isfinite(dist))
            throw NumericError("evolve: non-finite field at step " + std::to_string(step));
        series.t.push_back(t);
        series.l2_dist.push_back(dist);
        series.norm2_sq.push_back(n2);
        series.mass.push_back(field_mass(f, grid));
        series.dissipation.push_back(setup.collision.dissipation(f));
        series.linf.push_back(setup.norm_inf(f));
        series.min_value.push_back(*std::min_element(f.begin(), f.end()));
        if (setup.classes)
            series.class_masses.push_back(class_masses(f, *setup.classes, grid));
        if (opts.snapshot_stride > 0 &&
            static_cast<int>(series.snapshots.size()) < opts.max_snapshots &&
            (series.t.size() - 1) % static_cast<std::size_t>(opts.snapshot_stride) == 0)
            series.snapshots.push_back({t, f});
    };

    record(0.0, 0);
    bool have_prev = false;
    for (long step = 0; step < nsteps; ++step) {
        if (opts.scheme == Scheme::Strang) {
            collision_substep(setup.collision, 0.5 * opts.dt, f, s1, s2);
            plan.apply(f, pulled);
            f.swap(pulled);
            collision_substep(setup.collision, 0.5 * opts.dt, f, s1, s2);
        } else {
            // midpoint-in-time gain: AB2 extrapolation to t + dt/2 (predictor on the first step)
            ftilde.resize(f.size());
            if (have_prev) {
                for (std::size_t i = 0; i < f.size(); ++i) ftilde[i] = 1.5 * f[i] - 0.5 * fprev[i];
            } else {
                setup.collision.apply(f, s1);
                for (std::size_t i = 0; i < f.size(); ++i) ftilde[i] = f[i] + 0.5 * opts.dt * s1[i];
            }
            setup.collision.gain(ftilde, gain);
            plan.apply(f, pulled);
            plan_half->apply(gain, gpulled);
            fprev = f;
            have_prev = true;
            for (std::size_t i = 0; i < f.size(); ++i)
                f[i] = att_full[i] * pulled[i] + opts.dt * att_half[i] * gpulled[i];
        }
        if (opts.renormalize_mass) {
            const double m = field_mass(f, grid);
            if (std::abs(m) > 1e-300) {
                const double scale = series.initial_mass / m;
                for (auto& v : f) v *= scale;
            }
        }
        if ((step + 1) % out_every == 0 || step + 1 == nsteps)
            record(static_cast<double>(step + 1) * opts.dt, step + 1);
    }
    series.final_field = std::move(f);
    return series;
}

double dissipation_residual(const EvolutionSeries& series) {
    if (series.t.size() < 3) throw ContractError("dissipation_residual: series too short");
    const double e0 = series.norm2_sq.front();
    double worst = 0.0;
    for (std::size_t i = 0; i + 2 < series.t.size(); ++i) {
        const double dt2 = series.t[i + 2] - series.t[i];
        if (dt2 <= 0) continue;
        const double lhs = (series.norm2_sq[i + 2] - series.norm2_sq[i]) / dt2;
        worst = std::max(worst, std::abs(lhs + series.dissipation[i + 1]));
    }
    return worst / std::max(e0, 1e-300);
}

std::vector<double> class_masses(const std::vector<double>& f, const ClassStructure& classes,
                                 const PhaseGrid& grid) {
    std::vector<double> out;
    out.reserve(classes.class_regions.size());
    for (const auto& region : classes.class_regions) {
        double m = 0.0;
        for (std::size_t cell : region) m += grid.w_cell() * f[cell];
        out.push_back(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// decay fitting

namespace {

struct LinFit {
    double slope = 0, intercept = 0, rms = 0;
};

LinFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    LinFit fit;
    const std::size_t n = x.size();
    if (n < 2) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) return fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        acc += r * r;
    }
    fit.rms = std::sqrt(acc / n);
    return fit;
}

} // namespace

DecayReport fit_decay(const std::vector<double>& t, const std::vector<double>& dist) {
    if (t.size() != dist.size()) throw ContractError("fit_decay: length mismatch");
    // discard the initial transient (first 10%) and anything at the numerical floor
    const double floor = 1e-12 * (dist.empty() ? 1.0 : dist.front());
    std::vector<double> tt, ly;
    const std::size_t skip = t.size() / 10;
    for (std::size_t i = skip; i < t.size(); ++i) {
        if (dist[i] <= floor || dist[i] <= 0) break;
        tt.push_back(t[i]);
        ly.push_back(std::log(dist[i]));
    }
    if (tt.size() < 20) throw ContractError("fit_decay: need at least 20 usable samples past the transient");

    DecayReport rep;
    rep.used_t_min = tt.front();
    rep.used_t_max = tt.back();
    const double drop = ly.front() - ly.back();

    const LinFit fexp = least_squares(tt, ly);
    std::vector<double> lt(tt.size());
    for (std::size_t i = 0; i < tt.size(); ++i) lt[i] = std::log(1.0 + tt[i]);
    const LinFit fpoly = least_squares(lt, ly);

    rep.gamma = -fexp.slope;
    rep.poly_exponent = -fpoly.slope;
    const double denom = std::max(std::abs(drop), 1e-12);
    rep.gamma_residual = fexp.rms / denom;
    rep.poly_residual = fpoly.rms / denom;

    // five sliding windows
    const int nw = 5;
    for (int w = 0; w < nw; ++w) {
        const std::size_t b = tt.size() * w / nw;
        const std::size_t e = std::max(b + 2, tt.size() * (w + 1) / nw);
        if (e > tt.size()) break;
        std::vector<double> wt(tt.begin() + b, tt.begin() + e);
        std::vector<double> wy(ly.begin() + b, ly.begin() + e);
        rep.window_rates.push_back(-least_squares(wt, wy).slope);
    }

    if (drop < std::log(1.2)) {
        rep.verdict = "stalled";
    } else if (rep.gamma_residual <= rep.poly_residual) {
        rep.verdict = "exponential";
    } else {
        rep.verdict = "polynomial-like";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// hitting-time survival

SurvivalReport tau_survival(const OmegaPartition& omega, const PhaseGrid& grid, const PotentialSpec& pot,
                            const SurvivalOptions& opts) {
    if (opts.n_samples < 10000) throw ContractError("tau_survival: need at least 1e4 samples");
    if (opts.t_grid.empty()) throw ContractError("tau_survival: empty t grid");
    SurvivalReport rep;
    rep.t = opts.t_grid;
    const double t_max = *std::max_element(rep.t.begin(), rep.t.end());
    Rng rng(opts.seed);
    PhaseSetTest in_omega = [&](const Vec& x, const Vec& v) { return omega.contains(grid, x, v); };

    std::vector<std::size_t> alive(rep.t.size(), 0);
    std::size_t counted = 0;
    const int d = grid.dim();
    for (int i = 0; i < opts.n_samples; ++i) {
        State s;
        for (int a = 0; a < d; ++a) {
            s.x[a] = rng.uniform(opts.x_lo[a], opts.x_hi[a]);
            s.v[a] = rng.uniform(opts.v_lo[a], opts.v_hi[a]);
        }
        HittingResult hr =
            hitting_time(s, in_omega, pot, grid.domain(), t_max, opts.h, opts.backward);
        if (!hr.time && hr.status != TraceStatus::Completed) {
            ++rep.n_aborted;
            continue;
        }
        ++counted;
        const double tau = hr.time ? *hr.time : std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < rep.t.size(); ++k)
            if (tau > rep.t[k]) ++alive[k];
    }
    rep.survival.resize(rep.t.size());
    for (std::size_t k = 0; k < rep.t.size(); ++k)
        rep.survival[k] = counted ? static_cast<double>(alive[k]) / counted : 0.0;

    // slope of the decaying tail on log-log axes
    std::vector<double> lx, lyy;
    const double noise = 5.0 / std::max<std::size_t>(counted, 1);
    for (std::size_t k = 0; k < rep.t.size(); ++k) {
        if (rep.survival[k] >= 0.9 || rep.survival[k] <= noise) continue;
        lx.push_back(std::log(1.0 + rep.t[k]));
        lyy.push_back(std::log(rep.survival[k]));
    }
    if (lx.size() >= 2) {
        rep.slope = least_squares(lx, lyy).slope;
        rep.sqrt_slope = 0.5 * rep.slope;  // ||f|| ~ sqrt(surviving measure)
    }
    return rep;
}

// ---------------------------------------------------------------------------
// observability

ObservabilityReport observability_check(const std::vector<EvolutionSeries>& runs, double T) {
    ObservabilityReport rep;
    for (const auto& run : runs) {
        // trapezoid integral of D over [0, T]
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < run.t.size(); ++i) {
            if (run.t[i] >= T) break;
            const double t1 = std::min(run.t[i + 1], T);
            acc += 0.5 * (run.dissipation[i] + run.dissipation[i + 1]) * (t1 - run.t[i]);
        }
        const double e0 = run.initial_norm2_sq;
        if (acc <= 1e-14 * std::max(e0, 1e-300)) {
            if (e0 > 0) ++rep.violations;
            rep.per_run_K.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        rep.per_run_K.push_back(e0 / acc);
    }
    rep.K = 0;
    for (double k : rep.per_run_K)
        if (std::isfinite(k)) rep.K = std::max(rep.K, k);
    if (rep.K > 1.0 + 1e-12) {
        rep.gamma_from_K = -std::log(1.0 - 1.0 / rep.K) / (2.0 * T);
    } else if (rep.K > 0) {
        rep.gamma_from_K = std::numeric_limits<double>::infinity();
    }
    return rep;
}

} // namespace kinetic
