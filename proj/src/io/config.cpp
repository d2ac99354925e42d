#include "io/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "io/artifacts.hpp"

namespace kinetic {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

} // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
    ConfigMap m;
    m.text_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        m.kv_[section.empty() ? key : section + "." + key] = val;
    }
    return m;
}

bool ConfigMap::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string ConfigMap::get_string(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

std::string ConfigMap::require_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("config: missing required field '" + key + "'");
    return it->second;
}

double ConfigMap::get_double(const std::string& key, double def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: field '" + key + "' is not a number: " + it->second);
    }
}

double ConfigMap::require_double(const std::string& key) const {
    if (!has(key)) throw ConfigError("config: missing required field '" + key + "'");
    return get_double(key, 0.0);
}

long ConfigMap::get_long(const std::string& key, long def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    try {
        return std::stol(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config: field '" + key + "' is not an integer: " + it->second);
    }
}

bool ConfigMap::get_bool(const std::string& key, bool def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config: field '" + key + "' is not a boolean: " + v);
}

std::vector<double> ConfigMap::get_doubles(const std::string& key) const {
    std::vector<double> out;
    auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    for (const std::string& piece : split(it->second, ',')) {
        if (piece.empty()) continue;
        try {
            out.push_back(std::stod(piece));
        } catch (const std::exception&) {
            throw ConfigError("config: field '" + key + "' has a non-numeric entry: " + piece);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
    ExperimentConfig e;
    e.cfg = ConfigMap::parse(text);
    e.hash = config_hash(text);
    e.seed = static_cast<std::uint64_t>(e.cfg.get_long("experiment.seed", 1));
    e.threads = static_cast<int>(e.cfg.get_long("experiment.threads", 1));
    e.name = e.cfg.get_string("experiment.name", "experiment");
    e.output_dir = e.cfg.get_string("experiment.output_dir", "out");
    return e;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

DomainSpec ExperimentConfig::make_domain() const {
    const std::string kind = cfg.get_string("domain.kind", "torus");
    if (kind == "torus") return DomainSpec::torus(static_cast<int>(cfg.get_long("domain.d", 1)));
    if (kind == "disk") return DomainSpec::disk(cfg.get_double("domain.radius", 1.0));
    if (kind == "stadium")
        return DomainSpec::stadium(cfg.get_double("domain.straight", 2.0),
                                   cfg.get_double("domain.cap", 0.5));
    if (kind == "polygon") {
        std::vector<Vec> verts;
        for (const std::string& pair : split(cfg.require_string("domain.vertices"), ';')) {
            const auto xy = split(pair, ',');
            if (xy.size() != 2) throw ConfigError("config: polygon vertex must be 'x,y': " + pair);
            verts.push_back(vec2(std::stod(xy[0]), std::stod(xy[1])));
        }
        return DomainSpec::polygon(std::move(verts));
    }
    throw ConfigError("config: unknown domain.kind '" + kind + "'");
}

PotentialSpec ExperimentConfig::make_potential(const DomainSpec& dom) const {
    const std::string kind = cfg.get_string("potential.kind", "zero");
    if (kind == "zero") return PotentialSpec::zero();
    if (kind == "harmonic_trap") {
        const auto x0v = cfg.get_doubles("potential.x0");
        Vec x0 = {0.5, dom.dim() > 1 ? 0.5 : 0.0};
        for (std::size_t i = 0; i < x0v.size() && i < 2; ++i) x0[i] = x0v[i];
        return PotentialSpec::harmonic_trap(x0, cfg.get_double("potential.eps", 1.0),
                                            cfg.get_double("potential.eta", 0.2),
                                            cfg.get_double("potential.cutoff", 0.0));
    }
    if (kind == "tabulated") {
        const std::string path = cfg.require_string("potential.file");
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open tabulated potential: " + path);
        // CSV rows: index..., value, gradient components...
        std::vector<double> values, grads;
        std::string line;
        int nodes = static_cast<int>(cfg.get_long("potential.nodes", 0));
        while (std::getline(in, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            const auto parts = split(line, ',');
            const int d = dom.dim();
            if (static_cast<int>(parts.size()) != d + 1 + d)
                throw ConfigError("tabulated potential row needs index..., value, gradient...: " + line);
            values.push_back(std::stod(parts[d]));
            for (int a = 0; a < d; ++a) grads.push_back(std::stod(parts[d + 1 + a]));
        }
        if (nodes == 0) nodes = static_cast<int>(dom.dim() == 1 ? values.size() : std::lround(std::sqrt(values.size())));
        return PotentialSpec::tabulated(dom, nodes, std::move(values), std::move(grads));
    }
    throw ConfigError("config: unknown potential.kind '" + kind + "'");
}

PhaseGrid ExperimentConfig::make_grid(const DomainSpec& dom, const PotentialSpec& pot) const {
    PhaseGrid g = build_grid(dom, cfg.get_double("grid.vmax", 6.0),
                             static_cast<int>(cfg.get_long("grid.nx", 128)),
                             static_cast<int>(cfg.get_long("grid.nv", 128)));
    g.attach_potential(pot);
    return g;
}

Profile ExperimentConfig::parse_profile(const std::string& key, const std::string& def) const {
    const std::string spec = cfg.get_string(key, def);
    const std::size_t colon = spec.find(':');
    const std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    const auto nums = [&] {
        std::vector<double> out;
        for (const auto& p : split(args, ',')) {
            if (!p.empty()) out.push_back(std::stod(p));
        }
        return out;
    }();
    if (kind == "constant") {
        if (nums.size() != 1) throw ConfigError("profile '" + key + "': constant:VALUE");
        return Profile::constant(nums[0]);
    }
    if (kind == "interval") {
        if (nums.size() < 3) throw ConfigError("profile '" + key + "': interval:lo,hi,ramp[,height]");
        return Profile::interval(nums[0], nums[1], nums[2], nums.size() > 3 ? nums[3] : 1.0);
    }
    if (kind == "ball") {
        if (nums.size() < 3) throw ConfigError("profile '" + key + "': ball:cx[,cy],rin,rout[,height]");
        if (nums.size() == 3) return Profile::ball(vec1(nums[0]), nums[1], nums[2]);
        if (nums.size() == 4) return Profile::ball(vec1(nums[0]), nums[1], nums[2], nums[3]);
        return Profile::ball(vec2(nums[0], nums[1]), nums[2], nums[3], nums.size() > 4 ? nums[4] : 1.0);
    }
    throw ConfigError("profile '" + key + "': unknown kind '" + kind + "'");
}

bool ExperimentConfig::kernel_is_bgk() const {
    return cfg.get_string("kernel.family", "linear_relaxation") == "bgk";
}

KernelSpec ExperimentConfig::make_kernel(const PhaseGrid& grid) const {
    const std::string family = cfg.get_string("kernel.family", "linear_relaxation");
    if (family == "linear_relaxation")
        return KernelSpec::linear_relaxation(parse_profile("kernel.sigma", "constant:1"));
    if (family == "factorized")
        return KernelSpec::factorized(parse_profile("kernel.sigma", "constant:1"),
                                      cfg.get_double("kernel.kstar", 1.0));
    if (family == "mult_example")
        return KernelSpec::mult_example(cfg.get_double("kernel.alpha_height", 1.0),
                                        cfg.get_double("kernel.psi_amp", 1.0));
    if (family == "degenerate_v") return KernelSpec::degenerate_v();
    if (family == "two_class")
        return KernelSpec::two_class(parse_profile("kernel.alpha", "interval:0.55,0.95,0.05"),
                                     parse_profile("kernel.beta", "interval:0.05,0.45,0.05"),
                                     cfg.get_double("kernel.amp", 4.0));
    if (family == "phi_zero") return KernelSpec::phi_zero(cfg.get_double("kernel.amp", 4.0));
    if (family == "tabulated") {
        const std::string path = cfg.require_string("kernel.file");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot open tabulated kernel: " + path);
        const std::size_t n =
            grid.num_x_cells() * grid.num_v_cells() * grid.num_v_cells();
        std::vector<double> tab(n);
        in.read(reinterpret_cast<char*>(tab.data()), static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw ConfigError("tabulated kernel file too short for this grid: " + path);
        return KernelSpec::tabulated(std::move(tab), static_cast<int>(grid.num_x_cells()),
                                     static_cast<int>(grid.num_v_cells()));
    }
    throw ConfigError("config: unknown kernel.family '" + family + "'");
}

Profile ExperimentConfig::bgk_sigma() const { return parse_profile("kernel.sigma", "constant:1"); }

std::function<double(double)> ExperimentConfig::bgk_phi() const {
    const std::string spec = cfg.get_string("kernel.bgk_phi", "exp_neg");
    if (spec == "exp_neg") return [](double h) { return std::exp(-h); };
    const std::size_t colon = spec.find(':');
    if (spec.substr(0, colon) == "power") {
        const double q = std::stod(spec.substr(colon + 1));
        return [q](double h) { return std::pow(1.0 + std::max(0.0, h), -q); };
    }
    throw ConfigError("config: unknown kernel.bgk_phi '" + spec + "'");
}

SolverOptions ExperimentConfig::solver_options() const {
    SolverOptions o;
    const std::string scheme = cfg.get_string("sim.scheme", "duhamel_sl");
    if (scheme == "strang") {
        o.scheme = Scheme::Strang;
    } else if (scheme == "duhamel_sl") {
        o.scheme = Scheme::DuhamelSL;
    } else {
        throw ConfigError("config: unknown sim.scheme '" + scheme + "'");
    }
    const std::string interp = cfg.get_string("sim.interp", "linear");
    if (interp == "linear") {
        o.interp = Interp::Linear;
    } else if (interp == "cubic") {
        o.interp = Interp::Cubic;
    } else if (interp == "spectral") {
        o.interp = Interp::Spectral;
    } else {
        throw ConfigError("config: unknown sim.interp '" + interp + "'");
    }
    o.dt = cfg.get_double("sim.dt", 1e-3);
    o.T = cfg.get_double("sim.T", 1.0);
    o.output_dt = cfg.get_double("experiment.output_every", 0.0);
    o.flow_substep = cfg.get_double("sim.flow_substep", 0.0);
    o.interp_safety = cfg.get_double("sim.interp_safety", 1.0);
    o.threads = threads;
    o.renormalize_mass = cfg.get_bool("sim.renormalize", false);
    o.snapshot_stride = static_cast<int>(cfg.get_long("sim.snapshot_stride", 0));
    return o;
}

std::vector<double> ExperimentConfig::initial_field(const PhaseGrid& grid, const PotentialSpec& pot) const {
    const std::string kind = cfg.get_string("init.kind", "density_modes");
    const std::size_t Nv = grid.num_v_cells();
    std::vector<double> f(grid.num_cells(), 0.0);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    if (kind == "equilibrium") {
        for (std::size_t ix : grid.inside_x())
            for (std::size_t iv = 0; iv < Nv; ++iv)
                f[ix * Nv + iv] = grid.exp_neg_v()[ix] * grid.maxwellian_h(iv);
        return f;
    }
    if (kind == "density_modes") {
        // smooth nonnegative perturbation of the Maxwellian: low-mode density and
        // a velocity skew, so the datum is not collision-stationary
        const double ax = cfg.get_double("init.amp_x", 0.5);
        const double av = cfg.get_double("init.amp_v", 0.5);
        const int kmode = static_cast<int>(cfg.get_long("init.mode", 1));
        const double pi2 = 6.283185307179586476925286766559;
        for (std::size_t ix : grid.inside_x()) {
            const Vec x = grid.x_center(ix);
            double rho = 1.0 + ax * std::cos(pi2 * kmode * x[0]);
            if (grid.dim() > 1) rho *= 1.0 + 0.5 * ax * std::sin(pi2 * kmode * x[1]);
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                const Vec v = grid.v_center(iv);
                const double skew = 1.0 + av * v[0] / (1.0 + norm2(v, grid.dim()));
                f[ix * Nv + iv] = rho * skew * grid.maxwellian_h(iv);
            }
        }
        return f;
    }
    if (kind == "gaussian_phase") {
        const auto c = cfg.get_doubles("init.center");  // x..., v...
        const double sx = cfg.get_double("init.sigma_x", 0.1);
        const double sv = cfg.get_double("init.sigma_v", 0.1);
        Vec x0 = {0.5, 0.0}, v0 = {0.0, 0.0};
        const int d = grid.dim();
        for (int a = 0; a < d && a < static_cast<int>(c.size()); ++a) x0[a] = c[a];
        for (int a = 0; a < d && d + a < static_cast<int>(c.size()); ++a) v0[a] = c[d + a];
        for (std::size_t ix : grid.inside_x()) {
            const Vec dx = grid.domain().wrap_delta(grid.x_center(ix), x0);
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                Vec dv = grid.v_center(iv);
                for (int a = 0; a < d; ++a) dv[a] -= v0[a];
                f[ix * Nv + iv] = std::exp(-0.5 * norm2(dx, d) / (sx * sx)) *
                                  std::exp(-0.5 * norm2(dv, d) / (sv * sv));
            }
        }
        return f;
    }
    if (kind == "random") {
        for (std::size_t ix : grid.inside_x())
            for (std::size_t iv = 0; iv < Nv; ++iv)
                f[ix * Nv + iv] = rng.uniform() * grid.maxwellian_h(iv);
        return f;
    }
    (void)pot;
    throw ConfigError("config: unknown init.kind '" + kind + "'");
}

} // namespace kinetic
