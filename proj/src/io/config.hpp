#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "control/control.hpp"
#include "flow/flow.hpp"
#include "kernels/kernels.hpp"
#include "solver/solver.hpp"

namespace kinetic {

/**
 * One experiment = one config file: INI-style sections of key = value lines.
 * '#' starts a comment. Keys are looked up as "section.key".
 */
class ConfigMap {
public:
    static ConfigMap parse(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& def = "") const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double def) const;
    double require_double(const std::string& key) const;
    long get_long(const std::string& key, long def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::vector<double> get_doubles(const std::string& key) const;  // comma separated

    const std::string& text() const { return text_; }

private:
    std::map<std::string, std::string> kv_;
    std::string text_;
};

/// Everything one run needs, resolved from a config file.
struct ExperimentConfig {
    ConfigMap cfg;
    std::string hash;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string name;
    std::string output_dir;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_string(const std::string& text);

    DomainSpec make_domain() const;
    PotentialSpec make_potential(const DomainSpec& dom) const;
    PhaseGrid make_grid(const DomainSpec& dom, const PotentialSpec& pot) const;
    bool kernel_is_bgk() const;
    KernelSpec make_kernel(const PhaseGrid& grid) const;
    Profile parse_profile(const std::string& key, const std::string& def) const;
    SolverOptions solver_options() const;
    std::vector<double> initial_field(const PhaseGrid& grid, const PotentialSpec& pot) const;
    /// For BGK runs: the sigma profile and equilibrium shape phi(H).
    Profile bgk_sigma() const;
    std::function<double(double)> bgk_phi() const;
};

} // namespace kinetic
