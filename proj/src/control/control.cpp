#include "control/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace kinetic {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

int compress_labels(UnionFind& uf, std::vector<int>& label) {
    std::vector<int> remap(uf.parent.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < uf.parent.size(); ++i) {
        const int r = uf.find(static_cast<int>(i));
        if (remap[r] < 0) remap[r] = next++;
    }
    for (auto& l : label) l = remap[uf.find(l)];
    return next;
}

} // namespace

bool OmegaPartition::contains(const PhaseGrid& g, const Vec& x, const Vec& v) const {
    std::size_t ix, iv;
    if (!g.locate_x(g.domain().canonicalize(x), ix) || !g.locate_v(v, iv)) return false;
    return mask[ix * g.num_v_cells() + iv] != 0;
}

int label_components(const PhaseGrid& grid, const std::vector<char>& mask, std::vector<int>& component) {
    const int d = grid.dim();
    const std::size_t Nv = grid.num_v_cells();
    const std::size_t total = grid.num_cells();
    component.assign(total, -1);
    const bool torus = grid.domain().kind() == DomainKind::Torus;
    int ncomp = 0;
    std::vector<std::size_t> stack;
    int xm[2], vm[2];
    for (std::size_t start = 0; start < total; ++start) {
        if (!mask[start] || component[start] >= 0) continue;
        component[start] = ncomp;
        stack.assign(1, start);
        while (!stack.empty()) {
            const std::size_t cell = stack.back();
            stack.pop_back();
            const std::size_t ix = cell / Nv, iv = cell % Nv;
            grid.x_multi(ix, xm);
            grid.v_multi(iv, vm);
            auto visit = [&](std::size_t nix, std::size_t niv) {
                const std::size_t nc = nix * Nv + niv;
                if (mask[nc] && component[nc] < 0) {
                    component[nc] = ncomp;
                    stack.push_back(nc);
                }
            };
            for (int a = 0; a < d; ++a) {
                for (int step : {-1, +1}) {
                    int nxm[2] = {xm[0], xm[1]};
                    nxm[a] += step;
                    if (torus) {
                        nxm[a] = (nxm[a] + grid.nx()) % grid.nx();
                    } else if (nxm[a] < 0 || nxm[a] >= grid.nx()) {
                        continue;
                    }
                    const std::size_t nix = grid.x_linear(nxm);
                    if (!grid.x_inside(nix)) continue;
                    visit(nix, iv);
                }
            }
            for (int a = 0; a < d; ++a) {
                for (int step : {-1, +1}) {
                    int nvm[2] = {vm[0], vm[1]};
                    nvm[a] += step;
                    if (nvm[a] < 0 || nvm[a] >= grid.nv()) continue;
                    visit(ix, grid.v_linear(nvm));
                }
            }
        }
        ++ncomp;
    }
    return ncomp;
}

OmegaPartition extract_omega(const BoundKernel& kernel, double eps_rel) {
    const PhaseGrid& grid = kernel.grid();
    const std::size_t Nv = grid.num_v_cells();
    OmegaPartition om;
    om.eps_omega = eps_rel * kernel.max_b();
    if (!(kernel.max_b() > 0)) throw ConfigError("extract_omega: kernel vanishes identically (empty omega)");

    om.mask.assign(grid.num_cells(), 0);
    om.px_mask.assign(grid.num_x_cells(), 0);
    double covered = 0, total = 0;
    for (std::size_t ix : grid.inside_x()) {
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            total += grid.w_cell();
            if (kernel.b_grid(ix, iv) > om.eps_omega) {
                om.mask[ix * Nv + iv] = 1;
                om.px_mask[ix] = 1;
                covered += grid.w_cell();
            }
        }
    }
    om.covered_fraction = covered / total;

    om.num_components = label_components(grid, om.mask, om.component);
    om.cells.assign(om.num_components, {});
    for (std::size_t c = 0; c < om.mask.size(); ++c)
        if (om.component[c] >= 0) om.cells[om.component[c]].push_back(c);

    if (kernel.spec().omega_factorizes()) {
        // E3'' structure: every masked x-column must be fully masked
        bool ok = true;
        for (std::size_t ix : grid.inside_x()) {
            if (!om.px_mask[ix]) continue;
            for (std::size_t iv = 0; iv < Nv && ok; ++iv)
                if (!om.mask[ix * Nv + iv]) ok = false;
        }
        if (!ok) throw NumericError("omega of an E3''-family kernel failed to factorize as omega_x x v-box");
        om.factorization_checked = true;
    }
    return om;
}

// ---------------------------------------------------------------------------

namespace {

State sample_state(Rng& rng, const PhaseGrid& grid, const GccOptions& opts) {
    const DomainSpec& dom = grid.domain();
    const int d = dom.dim();
    Vec lo, hi;
    dom.bounding_box(lo, hi);
    if (opts.x_lo) lo = *opts.x_lo;
    if (opts.x_hi) hi = *opts.x_hi;
    Vec vlo = {-grid.v_max(), -grid.v_max()}, vhi = {grid.v_max(), grid.v_max()};
    if (opts.v_lo) vlo = *opts.v_lo;
    if (opts.v_hi) vhi = *opts.v_hi;
    State s;
    for (int tries = 0; tries < 10000; ++tries) {
        for (int a = 0; a < d; ++a) s.x[a] = rng.uniform(lo[a], hi[a]);
        if (!dom.bounded() || dom.inside(s.x)) break;
    }
    for (int a = 0; a < d; ++a) s.v[a] = rng.uniform(vlo[a], vhi[a]);
    return s;
}

} // namespace

GccReport check_gcc(const OmegaPartition& omega, const PhaseGrid& grid, const PotentialSpec& pot,
                    const GccOptions& opts) {
    if (opts.n_samples < 1000) throw ContractError("check_gcc: need at least 1000 samples");
    GccReport rep;
    Rng rng(opts.seed);
    PhaseSetTest in_omega = [&](const Vec& x, const Vec& v) { return omega.contains(grid, x, v); };

    std::size_t controlled = 0, counted = 0, controlled_coarse = 0, counted_coarse = 0;
    const std::size_t half = static_cast<std::size_t>(opts.n_samples) / 2;
    for (std::size_t i = 0; i < static_cast<std::size_t>(opts.n_samples); ++i) {
        State s = sample_state(rng, grid, opts);
        HittingResult hr = hitting_time(s, in_omega, pot, grid.domain(), opts.T, opts.h, false);
        const bool aborted = !hr.time && hr.status != TraceStatus::Completed;
        if (aborted) {
            ++rep.n_aborted;
            continue;
        }
        ++counted;
        if (i < half) ++counted_coarse;
        if (hr.time) {
            ++controlled;
            if (i < half) ++controlled_coarse;
        } else if (rep.worst.size() < 8) {
            rep.worst.push_back(s);
        }
    }
    rep.n_samples = counted;
    rep.fraction = counted ? static_cast<double>(controlled) / counted : 0.0;
    rep.fraction_coarse = counted_coarse ? static_cast<double>(controlled_coarse) / counted_coarse : 0.0;
    rep.holds_sampled = counted > 0 && controlled == counted;
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

/// Time average of b along the (broken) trajectory from z over [0,T]; NaN on abort.
double trajectory_average(const BoundKernel& kernel, const PotentialSpec& pot, const State& z,
                          double T, double h) {
    const DomainSpec& dom = kernel.grid().domain();
    TraceOptions topt;
    topt.sample_dt = 0;  // every step
    State s = z;
    s.t = 0;
    double acc = 0.0;
    double prev_b = kernel.b_continuous(dom.canonicalize(s.x), s.v);
    double elapsed = 0.0;
    // trapezoid along steps; reflections land mid-step and keep |v| so b stays well defined
    TrajectoryRecord rec = trace(s, pot, dom, T, h, topt);
    if (rec.status != TraceStatus::Completed) return std::nan("");
    for (std::size_t i = 1; i < rec.samples.size(); ++i) {
        const State& a = rec.samples[i];
        const double bnow = kernel.b_continuous(dom.canonicalize(a.x), a.v);
        const double dt = std::abs(a.t - rec.samples[i - 1].t);
        acc += 0.5 * (prev_b + bnow) * dt;
        prev_b = bnow;
        elapsed += dt;
    }
    if (elapsed <= 0) return std::nan("");
    return acc / elapsed;
}

struct NelderMead {
    // minimizes fn over R^n with torus-aware coordinates handled by the caller through fn
    static std::vector<double> run(std::vector<std::vector<double>> simplex,
                                   const std::function<double(const std::vector<double>&)>& fn,
                                   int iters, double* best_out,
                                   std::vector<double>* trace_out = nullptr) {
        const std::size_t n = simplex[0].size();
        std::vector<double> fv(simplex.size());
        for (std::size_t i = 0; i < simplex.size(); ++i) fv[i] = fn(simplex[i]);
        for (int it = 0; it < iters; ++it) {
            // order
            std::vector<std::size_t> idx(simplex.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            std::vector<std::vector<double>> s2;
            std::vector<double> f2;
            for (std::size_t i : idx) {
                s2.push_back(simplex[i]);
                f2.push_back(fv[i]);
            }
            simplex = s2;
            fv = f2;
            if (trace_out) trace_out->push_back(fv[0]);
            // centroid of all but worst
            std::vector<double> cen(n, 0.0);
            for (std::size_t i = 0; i + 1 < simplex.size(); ++i)
                for (std::size_t a = 0; a < n; ++a) cen[a] += simplex[i][a];
            for (auto& c : cen) c /= static_cast<double>(simplex.size() - 1);
            auto blend = [&](double t) {
                std::vector<double> p(n);
                for (std::size_t a = 0; a < n; ++a) p[a] = cen[a] + t * (simplex.back()[a] - cen[a]);
                return p;
            };
            auto refl = blend(-1.0);
            const double fr = fn(refl);
            if (fr < fv[0]) {
                auto exp_p = blend(-2.0);
                const double fe = fn(exp_p);
                simplex.back() = fe < fr ? exp_p : refl;
                fv.back() = std::min(fe, fr);
            } else if (fr < fv[fv.size() - 2]) {
                simplex.back() = refl;
                fv.back() = fr;
            } else {
                auto con = blend(0.5);
                const double fc = fn(con);
                if (fc < fv.back()) {
                    simplex.back() = con;
                    fv.back() = fc;
                } else {
                    for (std::size_t i = 1; i < simplex.size(); ++i) {
                        for (std::size_t a = 0; a < n; ++a)
                            simplex[i][a] = simplex[0][a] + 0.5 * (simplex[i][a] - simplex[0][a]);
                        fv[i] = fn(simplex[i]);
                    }
                }
            }
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < fv.size(); ++i)
            if (fv[i] < fv[best]) best = i;
        *best_out = fv[best];
        return simplex[best];
    }
};

} // namespace

LebeauEstimate lebeau_constant(const BoundKernel& kernel, const PotentialSpec& pot,
                               const LebeauOptions& opts) {
    if (!(opts.T > 0)) throw ContractError("lebeau_constant: T must be positive");
    const PhaseGrid& grid = kernel.grid();
    const DomainSpec& dom = grid.domain();
    const int d = dom.dim();
    Rng rng(opts.seed);

    LebeauEstimate est;
    est.T = opts.T;
    est.n_samples = opts.n_samples;

    // stratified sampling over speed shells: |v| in equal bands of [0, v_max]
    const int n_strata = 16;
    std::vector<std::pair<double, State>> evals;
    evals.reserve(opts.n_samples);
    std::size_t aborted = 0;
    for (int i = 0; i < opts.n_samples; ++i) {
        const int stratum = i % n_strata;
        State s;
        Vec lo, hi;
        dom.bounding_box(lo, hi);
        for (int tries = 0; tries < 10000; ++tries) {
            for (int a = 0; a < d; ++a) s.x[a] = rng.uniform(lo[a], hi[a]);
            if (!dom.bounded() || dom.inside(s.x)) break;
        }
        const double speed = grid.v_max() * (stratum + rng.uniform()) / n_strata;
        if (d == 1) {
            s.v[0] = rng.uniform() < 0.5 ? speed : -speed;
        } else {
            const double ang = rng.uniform(0.0, 6.283185307179586);
            s.v = {speed * std::cos(ang), speed * std::sin(ang)};
        }
        const double J = trajectory_average(kernel, pot, s, opts.T, opts.h);
        if (std::isnan(J)) {
            ++aborted;
            continue;
        }
        evals.push_back({J, s});
    }
    if (evals.empty()) throw NumericError("lebeau_constant: all sampled trajectories aborted");

    std::sort(evals.begin(), evals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    est.c_minus = evals.front().first;
    est.argmin = evals.front().second;
    est.c_plus = evals.back().first;
    est.argmax = evals.back().second;

    auto pack = [&](const State& s) {
        std::vector<double> p(2 * d);
        for (int a = 0; a < d; ++a) {
            p[a] = s.x[a];
            p[d + a] = s.v[a];
        }
        return p;
    };
    auto unpack = [&](const std::vector<double>& p) {
        State s;
        for (int a = 0; a < d; ++a) {
            s.x[a] = p[a];
            s.v[a] = p[d + a];
        }
        s.x = dom.canonicalize(s.x);
        return s;
    };
    auto objective_min = [&](const std::vector<double>& p) {
        State s = unpack(p);
        if (dom.bounded() && !dom.inside(s.x)) return 1e30;
        for (int a = 0; a < d; ++a)
            if (std::abs(s.v[a]) > grid.v_max()) return 1e30;
        const double J = trajectory_average(kernel, pot, s, opts.T, opts.h);
        return std::isnan(J) ? 1e30 : J;
    };
    auto objective_max = [&](const std::vector<double>& p) { return -objective_min(p); };

    // Nelder-Mead polish from the best few sampled starts (both extremes)
    const int ncand = std::min<int>(opts.refine_candidates, static_cast<int>(evals.size()));
    const double scale_x = 2.0 * grid.dx();
    const double scale_v = 2.0 * grid.dv();
    for (int c = 0; c < ncand; ++c) {
        auto make_simplex = [&](const State& s0) {
            std::vector<std::vector<double>> sim;
            sim.push_back(pack(s0));
            for (int a = 0; a < 2 * d; ++a) {
                auto p = pack(s0);
                p[a] += (a < d ? scale_x : scale_v);
                sim.push_back(p);
            }
            return sim;
        };
        double best = 0;
        const auto pmin = NelderMead::run(make_simplex(evals[c].second), objective_min,
                                          opts.refine_steps, &best,
                                          c == 0 ? &est.refine_trace : nullptr);
        if (best < est.c_minus) {
            est.c_minus = best;
            est.argmin = unpack(pmin);
        }
        double bestmax = 0;
        const auto pmax = NelderMead::run(make_simplex(evals[evals.size() - 1 - c].second),
                                          objective_max, opts.refine_steps, &bestmax);
        if (-bestmax > est.c_plus) {
            est.c_plus = -bestmax;
            est.argmax = unpack(pmax);
        }
    }
    est.c_minus = std::max(0.0, est.c_minus);
    return est;
}

// ---------------------------------------------------------------------------

namespace {

/// Marks every cell visited by the trajectory from `s`; appends distinct component transitions.
void trace_and_mark(const PhaseGrid& grid, const PotentialSpec& pot, const State& s0, double T,
                    double h, bool backward, std::vector<char>* mark,
                    const std::vector<int>* component, std::vector<std::pair<int, double>>* visits) {
    const DomainSpec& dom = grid.domain();
    TraceOptions topt;
    topt.backward = backward;
    TrajectoryRecord rec;
    try {
        rec = trace(s0, pot, dom, T, h, topt);
    } catch (const NumericError&) {
        return;
    }
    const std::size_t Nv = grid.num_v_cells();
    int last_comp = -2;
    for (const State& s : rec.samples) {
        std::size_t ix, iv;
        if (!grid.locate_x(dom.canonicalize(s.x), ix) || !grid.locate_v(s.v, iv)) continue;
        const std::size_t cell = ix * Nv + iv;
        if (mark) (*mark)[cell] = 1;
        if (component && visits) {
            const int c = (*component)[cell];
            if (c >= 0 && c != last_comp) {
                visits->push_back({c, s.t});
                last_comp = c;
            }
        }
    }
}

} // namespace

ClassStructure build_classes(const BoundKernel& kernel, const OmegaPartition& omega,
                             const PotentialSpec& pot, const ClassOptions& opts) {
    const PhaseGrid& grid = kernel.grid();
    const DomainSpec& dom = grid.domain();
    const std::size_t Nv = grid.num_v_cells();
    const int d = grid.dim();
    Rng rng(opts.seed);

    ClassStructure cs;
    cs.omega = omega;
    const double h = opts.h > 0 ? opts.h : grid.dx() / std::max(1.0, grid.v_max());

    // --- R_k edges between omega components: scan velocity pairs per x-column
    UnionFind uf(omega.num_components);
    auto scan_rk = [&](const std::vector<int>& component, UnionFind& u, std::vector<RKWitness>* out) {
        for (std::size_t ix : grid.inside_x()) {
            // distinct labeled cells in this column
            std::vector<std::size_t> labeled;
            for (std::size_t iv = 0; iv < Nv; ++iv)
                if (component[ix * Nv + iv] >= 0) labeled.push_back(iv);
            if (labeled.size() < 2) continue;
            const Vec x = grid.x_center(ix);
            const std::size_t npairs = labeled.size() * (labeled.size() - 1) / 2;
            const bool exhaustive = npairs <= opts.rk_pair_budget;
            const std::size_t budget = exhaustive ? npairs : opts.rk_pair_budget;
            for (std::size_t trial = 0; trial < budget; ++trial) {
                std::size_t i1, i2;
                if (exhaustive) {
                    // enumerate pair #trial
                    std::size_t a = 0, rem = trial;
                    while (rem >= labeled.size() - 1 - a) {
                        rem -= labeled.size() - 1 - a;
                        ++a;
                    }
                    i1 = a;
                    i2 = a + 1 + rem;
                } else {
                    i1 = rng.next_below(labeled.size());
                    i2 = rng.next_below(labeled.size());
                    if (i1 == i2) continue;
                }
                const std::size_t iv1 = labeled[i1], iv2 = labeled[i2];
                const int c1 = component[ix * Nv + iv1], c2 = component[ix * Nv + iv2];
                if (c1 == c2 || u.find(c1) == u.find(c2)) continue;
                const Vec v1 = grid.v_center(iv1), v2 = grid.v_center(iv2);
                double kv = 0;
                if (kernel.spec().separable()) {
                    kv = std::max(kernel.spec().eval(x, v1, v2, dom, d), kernel.spec().eval(x, v2, v1, dom, d));
                } else {
                    const auto& tab = kernel.spec().table();
                    kv = std::max(tab[(ix * Nv + iv1) * Nv + iv2] * maxwellian(v2, d),
                                  tab[(ix * Nv + iv2) * Nv + iv1] * maxwellian(v1, d));
                }
                if (kv > omega.eps_omega) {
                    u.unite(c1, c2);
                    if (out) out->push_back({std::min(c1, c2), std::max(c1, c2), x, v1, v2, kv});
                }
            }
        }
    };
    scan_rk(omega.component, uf, &cs.rk_edges);

    // --- R_phi edges: trace from component seeds in both time directions
    auto scan_rphi = [&](const std::vector<std::vector<std::size_t>>& comp_cells,
                         const std::vector<int>& component, UnionFind& u,
                         std::vector<RPhiWitness>* out, double T) {
        for (std::size_t c = 0; c < comp_cells.size(); ++c) {
            const auto& cells = comp_cells[c];
            const int nseeds = std::min<int>(opts.rphi_seeds_per_component, static_cast<int>(cells.size()));
            for (int sidx = 0; sidx < nseeds; ++sidx) {
                const std::size_t jitter = rng.next_below(std::max<std::size_t>(1, cells.size() / nseeds));
                const std::size_t cell = cells[(cells.size() * sidx / nseeds + jitter) % cells.size()];
                State s;
                s.x = grid.x_center(cell / Nv);
                s.v = grid.v_center(cell % Nv);
                for (bool backward : {false, true}) {
                    std::vector<std::pair<int, double>> visits;
                    trace_and_mark(grid, pot, s, T, h, backward, nullptr, &component, &visits);
                    for (const auto& [vc, vt] : visits) {
                        if (vc != static_cast<int>(c) && u.find(vc) != u.find(static_cast<int>(c))) {
                            u.unite(static_cast<int>(c), vc);
                            if (out)
                                out->push_back({std::min<int>(c, vc), std::max<int>(c, vc), s, vt, backward});
                        }
                    }
                }
            }
        }
    };
    scan_rphi(omega.cells, omega.component, uf, &cs.rphi_edges, opts.T_rphi);

    cs.class_of_component.assign(omega.num_components, 0);
    for (int c = 0; c < omega.num_components; ++c) cs.class_of_component[c] = c;
    cs.num_classes = compress_labels(uf, cs.class_of_component);

    // --- backward-reachable set: union of phi_{-s}(omega), sampled by backward tracing
    cs.reach_mask = omega.mask;  // s = 0 included
    std::vector<std::size_t> omega_cells;
    for (std::size_t cell = 0; cell < omega.mask.size(); ++cell)
        if (omega.mask[cell]) omega_cells.push_back(cell);
    const std::size_t stride = std::max<std::size_t>(1, omega_cells.size() / opts.reach_seed_budget);
    for (std::size_t i = 0; i < omega_cells.size(); i += stride) {
        const std::size_t cell = omega_cells[i];
        State s;
        s.x = grid.x_center(cell / Nv);
        s.v = grid.v_center(cell % Nv);
        trace_and_mark(grid, pot, s, opts.T_reach, h, true, &cs.reach_mask, nullptr, nullptr);
    }
    double covered = 0, total = 0;
    for (std::size_t ix : grid.inside_x())
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            total += grid.w_cell();
            if (cs.reach_mask[ix * Nv + iv]) covered += grid.w_cell();
        }
    cs.aeit_fraction = covered / total;

    cs.num_reach_components = label_components(grid, cs.reach_mask, cs.reach_component);
    std::vector<std::vector<std::size_t>> reach_cells(cs.num_reach_components);
    for (std::size_t cell = 0; cell < cs.reach_mask.size(); ++cell)
        if (cs.reach_component[cell] >= 0) reach_cells[cs.reach_component[cell]].push_back(cell);

    UnionFind uf2(cs.num_reach_components);
    scan_rk(cs.reach_component, uf2, nullptr);
    scan_rphi(reach_cells, cs.reach_component, uf2, nullptr, opts.T_rphi);
    cs.class_of_reach_component.assign(cs.num_reach_components, 0);
    for (int c = 0; c < cs.num_reach_components; ++c) cs.class_of_reach_component[c] = c;
    cs.num_reach_classes = compress_labels(uf2, cs.class_of_reach_component);

    cs.counts_match = cs.num_reach_classes == cs.num_classes;

    cs.class_regions.assign(cs.num_reach_classes, {});
    for (std::size_t cell = 0; cell < cs.reach_mask.size(); ++cell) {
        const int rc = cs.reach_component[cell];
        if (rc >= 0) cs.class_regions[cs.class_of_reach_component[rc]].push_back(cell);
    }

    // budget-stability probe: rerun the join with half the R_phi seeds
    if (omega.num_components > 1) {
        UnionFind uf_half(omega.num_components);
        scan_rk(omega.component, uf_half, nullptr);
        ClassOptions half = opts;
        half.rphi_seeds_per_component = std::max(1, opts.rphi_seeds_per_component / 2);
        std::vector<int> labels(omega.num_components);
        std::iota(labels.begin(), labels.end(), 0);
        // re-run with fewer seeds
        {
            Rng rng2(opts.seed ^ 0x5bd1e995u);
            for (std::size_t c = 0; c < omega.cells.size(); ++c) {
                const auto& cells = omega.cells[c];
                const int nseeds = std::min<int>(half.rphi_seeds_per_component, static_cast<int>(cells.size()));
                for (int sidx = 0; sidx < nseeds; ++sidx) {
                    const std::size_t cell = cells[rng2.next_below(cells.size())];
                    State s;
                    s.x = grid.x_center(cell / Nv);
                    s.v = grid.v_center(cell % Nv);
                    for (bool backward : {false, true}) {
                        std::vector<std::pair<int, double>> visits;
                        trace_and_mark(grid, pot, s, opts.T_rphi, h, backward, nullptr, &omega.component,
                                       &visits);
                        for (const auto& [vc, vt] : visits) {
                            (void)vt;
                            if (vc != static_cast<int>(c)) uf_half.unite(static_cast<int>(c), vc);
                        }
                    }
                }
            }
        }
        const int n_half = compress_labels(uf_half, labels);
        cs.inconclusive = n_half != cs.num_classes;
    }
    return cs;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> stationary_basis(const ClassStructure& classes, const PhaseGrid& grid) {
    if (!grid.has_potential_tables())
        throw ContractError("stationary_basis: grid has no attached potential tables");
    const std::size_t Nv = grid.num_v_cells();
    std::vector<std::vector<double>> basis;
    for (const auto& region : classes.class_regions) {
        if (region.empty()) throw NumericError("stationary_basis: empty class region");
        std::vector<double> f(grid.num_cells(), 0.0);
        double norm2acc = 0.0;
        for (std::size_t cell : region) {
            const std::size_t ix = cell / Nv, iv = cell % Nv;
            const double val = grid.exp_neg_v()[ix] * grid.maxwellian_h(iv);
            f[cell] = val;
            // ||1_U e^-V Mh||^2 = sum w e^-V Mh
            norm2acc += grid.w_cell() * val * std::exp(grid.potential_values()[ix]) * val /
                        grid.maxwellian_h(iv);
        }
        const double nrm = std::sqrt(norm2acc);
        for (std::size_t cell : region) f[cell] /= nrm;
        basis.push_back(std::move(f));
    }
    return basis;
}

std::vector<double> project_equilibrium(const std::vector<double>& f0, const ClassStructure& classes,
                                        const PhaseGrid& grid) {
    if (!grid.has_potential_tables())
        throw ContractError("project_equilibrium: grid has no attached potential tables");
    const std::size_t Nv = grid.num_v_cells();
    std::vector<double> out(grid.num_cells(), 0.0);
    for (const auto& region : classes.class_regions) {
        double mass = 0.0, weight = 0.0;  // weight = ||1_U e^-V Mh||^2 = sum w e^-V Mh
        for (std::size_t cell : region) {
            const std::size_t ix = cell / Nv, iv = cell % Nv;
            mass += grid.w_cell() * f0[cell];
            weight += grid.w_cell() * grid.exp_neg_v()[ix] * grid.maxwellian_h(iv);
        }
        const double coef = weight > 0 ? mass / weight : 0.0;
        for (std::size_t cell : region) {
            const std::size_t ix = cell / Nv, iv = cell % Nv;
            out[cell] = coef * grid.exp_neg_v()[ix] * grid.maxwellian_h(iv);
        }
    }
    return out;
}

std::vector<double> project_global_maxwellian(const std::vector<double>& f0, const PhaseGrid& grid) {
    if (!grid.has_potential_tables())
        throw ContractError("project_global_maxwellian: grid has no attached potential tables");
    const std::size_t Nv = grid.num_v_cells();
    double mass = 0.0, weight = 0.0;
    for (std::size_t ix : grid.inside_x()) {
        for (std::size_t iv = 0; iv < Nv; ++iv) mass += grid.w_cell() * f0[ix * Nv + iv];
        weight += grid.w_x() * grid.exp_neg_v()[ix];
    }
    std::vector<double> out(grid.num_cells(), 0.0);
    for (std::size_t ix : grid.inside_x()) {
        const double c = mass / weight * grid.exp_neg_v()[ix];
        for (std::size_t iv = 0; iv < Nv; ++iv) out[ix * Nv + iv] = c * grid.maxwellian_h(iv);
    }
    return out;
}

} // namespace kinetic
