// dsm — command-line driver: parameter sweeps, figure data, caching
//
// Exit codes: 0 success, 2 invalid configuration or grid, 3 convergence
// failure, 4 cache corruption, 1 anything else. Every failure prints a
// machine-readable "error: code=<n> type=<t> message=<m>" line on stderr.
#include "CLI11.hpp"

#include "dsm/cache.hpp"
#include "dsm/csv.hpp"
#include "dsm/dynamics.hpp"
#include "dsm/meanfield.hpp"
#include "dsm/observables.hpp"
#include "dsm/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInvalidConfig = 2,
    kConvergenceFailure = 3,
    kCacheCorruption = 4,
};

int classify(const std::exception& e) {
    if (dynamic_cast<const dsm::CacheError*>(&e)) return kCacheCorruption;
    if (dynamic_cast<const dsm::ConvergenceError*>(&e)) return kConvergenceFailure;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return kInvalidConfig;
    if (dynamic_cast<const std::out_of_range*>(&e)) return kInvalidConfig;
    return kFailure;
}

const char* code_name(int code) {
    switch (code) {
        case kInvalidConfig: return "invalid-config";
        case kConvergenceFailure: return "convergence-failure";
        case kCacheCorruption: return "cache-corruption";
        default: return "failure";
    }
}

void report_error(int code, const std::string& message) {
    std::fprintf(stderr, "error: code=%d type=%s message=%s\n", code, code_name(code),
                 message.c_str());
}

// ----------------------------------------------------------------- output

// Rows are gathered fully before writing so the metadata block can carry
// post-hoc statistics (eigensolve counts, cache hits).
struct Output {
    std::vector<std::string> meta;
    std::string runstats;  // volatile per-run statistics, kept on the timestamp line
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

void write_output(const Output& out, const std::string& path, const std::string& subcommand) {
    dsm::csv::Writer w(path);
    w.comment("dsm " + subcommand);
    // Everything volatile lives on this one line so that stripping it yields a
    // byte-identical file across repeated or cache-hit runs.
    w.comment("generated: " + timestamp() + (out.runstats.empty() ? "" : " " + out.runstats));
    w.comment("version: " + std::string(kVersion));
    for (const auto& line : out.meta) w.comment(line);
    w.header(out.header);
    for (const auto& r : out.rows) w.row(r);
}

std::string num(double x) { return dsm::csv::format_number(x); }

// --------------------------------------------------------------- options

struct GlobalOptions {
    std::string out_path;
    std::string cache_dir;
    int threads{1};
};

struct GridOptions {
    double lo{0.0};
    double hi{1.0};
    int points{1};

    std::vector<double> values() const {
        if (points < 1) throw std::invalid_argument("grid: points must be >= 1");
        if (points > 1 && !(hi > lo)) {
            throw std::invalid_argument("grid: max must exceed min when points > 1");
        }
        std::vector<double> v(points);
        for (int i = 0; i < points; ++i) {
            v[i] = (points == 1) ? lo : lo + (hi - lo) * i / (points - 1.0);
        }
        return v;
    }
};

void add_grid(CLI::App* cmd, const std::string& name, GridOptions& g) {
    cmd->add_option("--" + name + "-min", g.lo, name + " grid minimum");
    cmd->add_option("--" + name + "-max", g.hi, name + " grid maximum");
    cmd->add_option("--" + name + "-points", g.points, name + " grid point count");
}

void add_model(CLI::App* cmd, dsm::ModelParams& p, bool with_lambda = true,
               bool with_u = true) {
    cmd->add_option("--N", p.n_atoms, "number of atoms")->default_val(p.n_atoms);
    cmd->add_option("--omega", p.omega, "field frequency (energy unit)")->default_val(p.omega);
    cmd->add_option("--delta", p.delta, "qubit splitting")->default_val(p.delta);
    if (with_lambda) {
        cmd->add_option("--lambda", p.lambda, "qubit-boson coupling")->default_val(p.lambda);
    }
    if (with_u) cmd->add_option("--U", p.stark_u, "nonlinear Stark strength")->default_val(p.stark_u);
}

// Shared decomposition front-end: fixed truncation when k_trunc > 0, otherwise
// the escalation schedule; both paths go through the cache when one is set.
dsm::EigenDecomposition decompose(const dsm::ModelParams& p, int k_trunc,
                                  dsm::SpectrumStore* store, double rel_tol = 1e-6) {
    if (k_trunc > 0) {
        const auto key = dsm::decomposition_key(p, dsm::BasisTag::Dcs, k_trunc);
        if (store) {
            if (auto hit = store->load(key)) return *hit;
        }
        auto dec = dsm::eigendecompose(dsm::build_dcs_hamiltonian(p, k_trunc));
        dec.truncation = k_trunc;
        if (store) store->store(key, dec);
        return dec;
    }
    dsm::ConvergenceOptions opts;
    opts.store = store;
    return dsm::converged_spectrum(p, 10, rel_tol, opts).decomposition;
}

struct Runtime {
    const GlobalOptions& global;
    dsm::SpectrumStore* store;
};

void meta_common(Output& out, const Runtime& rt, const dsm::DecompositionCache* cache,
                 long eig_before) {
    out.runstats = "eigendecompositions=" +
                   std::to_string(dsm::eigendecompose_count().load() - eig_before);
    if (cache) {
        out.runstats += " cache_hits=" + std::to_string(cache->hits()) +
                        " cache_misses=" + std::to_string(cache->misses()) +
                        " cache_degraded=" + std::to_string(cache->degraded() ? 1 : 0);
    }
    out.runstats += " threads=" + std::to_string(rt.global.threads);
}

void meta_params(Output& out, const dsm::ModelParams& p) {
    out.meta.push_back("N=" + std::to_string(p.n_atoms) + " omega=" + num(p.omega) +
                       " delta=" + num(p.delta) + " lambda=" + num(p.lambda) +
                       " U=" + num(p.stark_u));
}

// Collects per-point failures; rows for failed points carry nan cells and the
// sanitized message in the status column, and the run exits nonzero.
struct FailureTracker {
    int exit_code{kOk};
    std::string first_message;

    void note(const dsm::PointOutcome& o) {
        if (o.ok) return;
        int code = kConvergenceFailure;
        if (o.error.find("invalid") != std::string::npos) code = kInvalidConfig;
        if (exit_code == kOk) {
            exit_code = code;
            first_message = o.error;
        }
    }
};

// ------------------------------------------------------------ subcommands

struct MeanfieldJob {
    dsm::ModelParams base;
    std::vector<double> u_grid{-1.5, 0.0, 1.5};
    double temperature{0.0};
    double landscape_lambda{-1.0};
    double landscape_alpha_max{2.0};
    int landscape_points{256};

    int run(const Runtime& rt) {
        Output out;
        if (landscape_lambda >= 0.0) {
            if (!(temperature > 0.0)) {
                throw std::invalid_argument("meanfield: landscape requires --T > 0");
            }
            out.header = {"u", "alpha", "free_energy"};
            for (double u : u_grid) {
                dsm::ModelParams p = base;
                p.stark_u = u;
                p.lambda = landscape_lambda;
                for (int i = 0; i <= landscape_points; ++i) {
                    const double a = landscape_alpha_max * i / landscape_points;
                    out.rows.push_back(
                        {num(u), num(a), num(dsm::free_energy_density(a, p, temperature))});
                }
            }
            out.meta.push_back("landscape_lambda=" + num(landscape_lambda) +
                               " T=" + num(temperature));
        } else {
            out.header = {"u", "lambda_c", "defined"};
            for (double u : u_grid) {
                dsm::ModelParams p = base;
                p.stark_u = u;
                const auto c = (temperature > 0.0)
                                   ? dsm::critical_coupling_thermal(p, temperature)
                                   : dsm::critical_coupling(p);
                out.rows.push_back({num(u), num(c.lambda_c), c.defined ? "1" : "0"});
            }
            out.meta.push_back("T=" + num(temperature));
        }
        meta_params(out, base);
        meta_common(out, rt, nullptr, dsm::eigendecompose_count().load());
        write_output(out, rt.global.out_path, "meanfield");
        return kOk;
    }
};

struct SpectrumJob {
    dsm::ModelParams base{.n_atoms = 32, .stark_u = 1.0};
    GridOptions lambda_grid{0.0, 0.6, 13};
    int levels{10};
    int k_trunc{6};
    std::vector<int> dfs_ntr;

    int run(const Runtime& rt) {
        base.validate();
        const long eig_before = dsm::eigendecompose_count().load();
        const auto lambdas = lambda_grid.values();
        const int count = static_cast<int>(lambdas.size());

        Output out;
        out.header = {"lambda"};
        for (int i = 0; i < levels; ++i) out.header.push_back("e" + std::to_string(i));
        for (int ntr : dfs_ntr) out.header.push_back("dfs_e0_ntr" + std::to_string(ntr));
        out.header.push_back("status");

        std::vector<std::vector<std::string>> rows(count);
        const auto outcomes = dsm::run_sweep(count, rt.global.threads, [&](int i) {
            dsm::ModelParams p = base;
            p.lambda = lambdas[i];
            p.validate();
            auto& row = rows[i];
            row.push_back(num(p.lambda));
            const auto dec = decompose(p, k_trunc, rt.store);
            if (dec.dimension() < levels) {
                throw std::invalid_argument("spectrum: --levels exceeds basis dimension " +
                                            std::to_string(dec.dimension()));
            }
            for (int l = 0; l < levels; ++l) row.push_back(num(dec.values(l)));
            for (int ntr : dfs_ntr) {
                const auto key = dsm::decomposition_key(p, dsm::BasisTag::FockProduct, ntr);
                dsm::EigenDecomposition dfs;
                if (auto hit = rt.store ? rt.store->load(key) : std::nullopt) {
                    dfs = *hit;
                } else {
                    dfs = dsm::eigendecompose(dsm::build_dfs_hamiltonian(p, ntr));
                    dfs.truncation = ntr;
                    if (rt.store) rt.store->store(key, dfs);
                }
                row.push_back(num(dfs.values(0)));
            }
            row.push_back("ok");
        });

        FailureTracker fail;
        for (int i = 0; i < count; ++i) {
            fail.note(outcomes[i]);
            if (!outcomes[i].ok) {
                rows[i].assign(out.header.size() - 1, "nan");
                rows[i][0] = num(lambdas[i]);
                rows[i].push_back(sanitize(outcomes[i].error));
            }
            out.rows.push_back(std::move(rows[i]));
        }

        meta_params(out, base);
        out.meta.push_back("k_trunc=" + std::to_string(k_trunc) +
                           " levels=" + std::to_string(levels));
        meta_common(out, rt, dynamic_cast<dsm::DecompositionCache*>(rt.store), eig_before);
        write_output(out, rt.global.out_path, "spectrum");
        if (fail.exit_code != kOk) report_error(fail.exit_code, fail.first_message);
        return fail.exit_code;
    }
};

struct PhotonSweepJob {
    dsm::ModelParams base{.n_atoms = 16, .stark_u = 1.0};
    GridOptions lambda_grid{0.2, 0.5, 40};
    double rel_tol{1e-6};

    int run(const Runtime& rt) {
        base.validate();
        const long eig_before = dsm::eigendecompose_count().load();
        const auto lambdas = lambda_grid.values();
        const int count = static_cast<int>(lambdas.size());

        Output out;
        out.header = {"lambda", "n_per_atom", "certified_ktr", "truncation",
                      "rel_error", "ground_photon_change", "status"};
        std::vector<std::vector<std::string>> rows(count);
        const auto outcomes = dsm::run_sweep(count, rt.global.threads, [&](int i) {
            dsm::ModelParams p = base;
            p.lambda = lambdas[i];
            p.validate();
            dsm::ConvergenceOptions opts;
            opts.store = rt.store;
            const auto r = dsm::ground_mean_photon(p, opts, rel_tol);
            rows[i] = {num(p.lambda),
                       num(r.per_atom),
                       std::to_string(r.spectrum.certified_k_trunc),
                       std::to_string(r.spectrum.decomposition.truncation),
                       num(r.spectrum.achieved_rel_error),
                       num(r.spectrum.ground_photon_change),
                       "ok"};
        });

        FailureTracker fail;
        for (int i = 0; i < count; ++i) {
            fail.note(outcomes[i]);
            if (!outcomes[i].ok) {
                rows[i] = {num(lambdas[i]), "nan", "nan", "nan", "nan", "nan",
                           sanitize(outcomes[i].error)};
            }
            out.rows.push_back(std::move(rows[i]));
        }

        meta_params(out, base);
        out.meta.push_back("rel_tol=" + num(rel_tol));
        meta_common(out, rt, dynamic_cast<dsm::DecompositionCache*>(rt.store), eig_before);
        write_output(out, rt.global.out_path, "photon-sweep");
        if (fail.exit_code != kOk) report_error(fail.exit_code, fail.first_message);
        return fail.exit_code;
    }
};

struct PhaseDiagramJob {
    dsm::ModelParams base{.n_atoms = 16};
    GridOptions lambda_grid{0.0, 1.0, 60};
    GridOptions u_grid{-1.5, 1.5, 60};
    double rel_tol{1e-6};
    bool allow_large_n{false};

    int run(const Runtime& rt) {
        if (base.n_atoms > 32 && !allow_large_n) {
            throw std::invalid_argument(
                "phase-diagram: N > 32 is expensive; pass --allow-large-n to confirm");
        }
        const long eig_before = dsm::eigendecompose_count().load();
        const auto lambdas = lambda_grid.values();
        const auto us = u_grid.values();
        const int nl = static_cast<int>(lambdas.size());
        const int count = nl * static_cast<int>(us.size());

        Output out;
        out.header = {"lambda", "u", "n_per_atom", "status"};
        std::vector<std::vector<std::string>> rows(count);
        const auto outcomes = dsm::run_sweep(count, rt.global.threads, [&](int i) {
            dsm::ModelParams p = base;
            p.stark_u = us[i / nl];
            p.lambda = lambdas[i % nl];
            p.validate();
            dsm::ConvergenceOptions opts;
            opts.store = rt.store;
            const auto r = dsm::ground_mean_photon(p, opts, rel_tol);
            rows[i] = {num(p.lambda), num(p.stark_u), num(r.per_atom), "ok"};
        });

        FailureTracker fail;
        for (int i = 0; i < count; ++i) {
            fail.note(outcomes[i]);
            if (!outcomes[i].ok) {
                rows[i] = {num(lambdas[i % nl]), num(us[i / nl]), "nan",
                           sanitize(outcomes[i].error)};
            }
            out.rows.push_back(std::move(rows[i]));
        }

        meta_params(out, base);
        out.meta.push_back("rel_tol=" + num(rel_tol));
        meta_common(out, rt, dynamic_cast<dsm::DecompositionCache*>(rt.store), eig_before);
        write_output(out, rt.global.out_path, "phase-diagram");
        if (fail.exit_code != kOk) report_error(fail.exit_code, fail.first_message);
        return fail.exit_code;
    }
};

struct DynamicsJob {
    dsm::ModelParams base{.n_atoms = 16, .lambda = 0.3};
    int k_trunc{50};
    double t_max{20.0};
    int t_points{401};

    int run(const Runtime& rt) {
        base.validate();
        const long eig_before = dsm::eigendecompose_count().load();
        if (t_points < 2 || !(t_max > 0.0)) {
            throw std::invalid_argument("dynamics: need --t-max > 0 and --t-points >= 2");
        }
        std::vector<double> times(t_points);
        for (int i = 0; i < t_points; ++i) times[i] = t_max * i / (t_points - 1.0);

        dsm::ConvergenceOptions opts;
        opts.store = rt.store;
        const auto traj = dsm::closed_photon_dynamics(base, times, k_trunc, opts);

        Output out;
        out.header = {"t", "n_per_atom"};
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            out.rows.push_back({num(traj.times[i]), num(traj.photon_per_atom[i])});
        }
        meta_params(out, base);
        out.meta.push_back("k_trunc=" + std::to_string(traj.k_trunc) +
                           " norm_deficit=" + num(traj.norm_deficit));
        meta_common(out, rt, dynamic_cast<dsm::DecompositionCache*>(rt.store), eig_before);
        write_output(out, rt.global.out_path, "dynamics");
        return kOk;
    }
};

struct G2SweepJob {
    dsm::ModelParams base{.n_atoms = 8};
    GridOptions lambda_grid{0.01, 1.2, 60};
    double temperature{0.1};
    int k_trunc{50};
    double rel_tol{1e-4};
    double weight_cut{1e-12};

    int run(const Runtime& rt) {
        base.validate();
        const long eig_before = dsm::eigendecompose_count().load();
        if (!(temperature >= 0.0)) throw std::invalid_argument("g2-sweep: --T must be >= 0");
        const auto lambdas = lambda_grid.values();
        const int count = static_cast<int>(lambdas.size());

        Output out;
        out.header = {"lambda", "g2", "levels_used", "rel_change", "status"};
        std::vector<std::vector<std::string>> rows(count);
        const auto outcomes = dsm::run_sweep(count, rt.global.threads, [&](int i) {
            dsm::ModelParams p = base;
            p.lambda = lambdas[i];
            p.validate();
            const auto dec = decompose(p, k_trunc, rt.store);
            const auto r = dsm::g2_zero(dec, p, temperature, 0, rel_tol, weight_cut);
            rows[i] = {num(p.lambda), num(r.value), std::to_string(r.levels_used),
                       num(r.rel_change), "ok"};
        });

        FailureTracker fail;
        for (int i = 0; i < count; ++i) {
            fail.note(outcomes[i]);
            if (!outcomes[i].ok) {
                rows[i] = {num(lambdas[i]), "nan", "nan", "nan", sanitize(outcomes[i].error)};
            }
            out.rows.push_back(std::move(rows[i]));
        }

        meta_params(out, base);
        out.meta.push_back("T=" + num(temperature) + " k_trunc=" + std::to_string(k_trunc) +
                           " rel_tol=" + num(rel_tol) + " weight_cut=" + num(weight_cut));
        meta_common(out, rt, dynamic_cast<dsm::DecompositionCache*>(rt.store), eig_before);
        write_output(out, rt.global.out_path, "g2-sweep");
        if (fail.exit_code != kOk) report_error(fail.exit_code, fail.first_message);
        return fail.exit_code;
    }
};

struct StatsSweepJob {
    dsm::ModelParams base{.n_atoms = 8};
    GridOptions lambda_grid{0.05, 2.0, 40};
    double temperature{0.1};
    int k_trunc{50};
    double weight_cut{1e-12};
    std::vector<std::string> observables{"negativity", "squeezing"};

    int run(const Runtime& rt) {
        base.validate();
        const long eig_before = dsm::eigendecompose_count().load();
        bool want_neg = false, want_sq = false;
        for (const auto& o : observables) {
            if (o == "negativity") {
                want_neg = true;
            } else if (o == "squeezing") {
                want_sq = true;
            } else {
                throw std::invalid_argument("stats-sweep: unknown observable '" + o + "'");
            }
        }
        const auto lambdas = lambda_grid.values();
        const int count = static_cast<int>(lambdas.size());

        Output out;
        out.header = {"lambda"};
        if (want_neg) out.header.push_back("negativity");
        if (want_sq) out.header.push_back("xi2");
        out.header.push_back("status");

        std::vector<std::vector<std::string>> rows(count);
        const auto outcomes = dsm::run_sweep(count, rt.global.threads, [&](int i) {
            dsm::ModelParams p = base;
            p.lambda = lambdas[i];
            p.validate();
            const auto dec = decompose(p, k_trunc, rt.store);
            auto& row = rows[i];
            row.push_back(num(p.lambda));
            if (want_neg) {
                const auto rho = dsm::thermal_product_density(dec, p, temperature, weight_cut);
                row.push_back(num(dsm::negativity(rho)));
            }
            if (want_sq) {
                const auto rho_atom =
                    dsm::thermal_atom_density(dec, p, temperature, weight_cut);
                row.push_back(num(dsm::spin_squeezing_from_atom(
                    rho_atom.cast<std::complex<double>>(), p.n_atoms)));
            }
            row.push_back("ok");
        });

        FailureTracker fail;
        for (int i = 0; i < count; ++i) {
            fail.note(outcomes[i]);
            if (!outcomes[i].ok) {
                rows[i].assign(out.header.size() - 1, "nan");
                rows[i][0] = num(lambdas[i]);
                rows[i].push_back(sanitize(outcomes[i].error));
            }
            out.rows.push_back(std::move(rows[i]));
        }

        meta_params(out, base);
        out.meta.push_back("T=" + num(temperature) + " k_trunc=" + std::to_string(k_trunc) +
                           " weight_cut=" + num(weight_cut));
        meta_common(out, rt, dynamic_cast<dsm::DecompositionCache*>(rt.store), eig_before);
        write_output(out, rt.global.out_path, "stats-sweep");
        if (fail.exit_code != kOk) report_error(fail.exit_code, fail.first_message);
        return fail.exit_code;
    }
};

struct RelaxJob {
    dsm::ModelParams base{.n_atoms = 2, .lambda = 0.4, .stark_u = 0.5};
    double temperature{0.5};
    double bath_alpha{0.001};
    double omega_c{10.0};
    int k_trunc{50};
    int levels{0};  // 0 = all with Boltzmann weight >= 1e-10, minimum 20
    double t_max{0.0};  // 0 = 50 / (pi alpha omega)
    int t_points{101};
    std::string initial{"perturbed"};
    std::string channels{"both"};
    double weight_cut{1e-12};

    int run(const Runtime& rt) {
        base.validate();
        const long eig_before = dsm::eigendecompose_count().load();
        if (!(temperature > 0.0)) throw std::invalid_argument("relax: --T must be > 0");
        const auto dec = decompose(base, k_trunc, rt.store);

        int m = levels;
        if (m <= 0) {
            const auto g = dsm::gibbs_state(dec, temperature, 1e-10);
            m = std::max(20, g.retained);
        }
        m = std::min(m, dec.dimension());

        dsm::BathSpec bath;
        bath.alpha = bath_alpha;
        bath.omega_c = omega_c;
        bath.temperature = temperature;
        if (channels == "field") {
            bath.atomic_channel = false;
        } else if (channels == "atomic") {
            bath.field_channel = false;
        } else if (channels != "both") {
            throw std::invalid_argument("relax: --channels must be both, field, or atomic");
        }
        const auto dis = dsm::build_dressed_dissipator(dec, bath, base, m);

        const auto gibbs = dsm::gibbs_state(dec, temperature, weight_cut);
        Eigen::VectorXd target = gibbs.weights.head(m);
        target /= target.sum();

        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(m, m);
        if (initial == "gibbs") {
            rho0.diagonal() = target.cast<std::complex<double>>();
        } else if (initial == "ground") {
            rho0(0, 0) = 1.0;
        } else if (initial == "perturbed") {
            Eigen::VectorXd pert = target;
            const int top = std::min(m - 1, 3);
            const double moved = 0.2 * pert(0);
            pert(0) -= moved;
            pert(top) += moved;
            rho0.diagonal() = pert.cast<std::complex<double>>();
        } else {
            throw std::invalid_argument("relax: --initial must be gibbs, perturbed, or ground");
        }

        const double horizon =
            (t_max > 0.0) ? t_max : 50.0 / (M_PI * bath_alpha * base.omega);
        if (t_points < 2) throw std::invalid_argument("relax: --t-points must be >= 2");
        std::vector<double> times(t_points);
        for (int i = 0; i < t_points; ++i) times[i] = horizon * i / (t_points - 1.0);

        const auto traj = dsm::evolve_master(rho0, dis, times);
        const auto steady = dsm::steady_state_populations(dis);
        const double steady_dev = (steady - target).cwiseAbs().maxCoeff();

        Output out;
        out.header = {"t", "dist_gibbs", "trace"};
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            Eigen::VectorXd pops = traj.states[i].diagonal().real();
            const double dist = 0.5 * (pops - target).cwiseAbs().sum();
            out.rows.push_back(
                {num(traj.times[i]), num(dist), num(traj.states[i].trace().real())});
        }

        meta_params(out, base);
        out.meta.push_back("T=" + num(temperature) + " alpha=" + num(bath_alpha) +
                           " omega_c=" + num(omega_c) + " levels=" + std::to_string(m) +
                           " channels=" + channels + " initial=" + initial);
        out.meta.push_back("steady_state_max_dev_from_gibbs=" + num(steady_dev));
        out.meta.push_back("integrator_steps=" + std::to_string(traj.steps) +
                           " max_trace_drift=" + num(traj.max_trace_drift) +
                           " min_eigenvalue=" + num(traj.min_eigenvalue));
        meta_common(out, rt, dynamic_cast<dsm::DecompositionCache*>(rt.store), eig_before);
        write_output(out, rt.global.out_path, "relax");
        return kOk;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dicke-stark model toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand
    app.set_config("--config", "", "configuration file (TOML/INI; flags override)");

    GlobalOptions global;
    app.add_option("--out", global.out_path, "output CSV path");
    app.add_option("--cache", global.cache_dir,
                   "decomposition cache directory (or env DSM_CACHE_DIR)");
    app.add_option("--threads", global.threads, "worker threads for sweeps")->default_val(1);

    MeanfieldJob mf;
    auto* c_mf = app.add_subcommand("meanfield", "mean-field critical couplings and landscapes");
    add_model(c_mf, mf.base, /*with_lambda=*/false, /*with_u=*/false);
    c_mf->add_option("--u-grid", mf.u_grid, "Stark strengths to tabulate")
        ->default_val(mf.u_grid);
    c_mf->add_option("--T", mf.temperature, "temperature (0 = ground state)")->default_val(0.0);
    c_mf->add_option("--landscape-lambda", mf.landscape_lambda,
                     "emit the free-energy landscape at this coupling instead of lambda_c");
    c_mf->add_option("--landscape-alpha-max", mf.landscape_alpha_max, "landscape alpha range");
    c_mf->add_option("--landscape-points", mf.landscape_points, "landscape grid points");

    SpectrumJob sp;
    auto* c_sp = app.add_subcommand("spectrum", "low-lying spectrum over a coupling grid");
    add_model(c_sp, sp.base, /*with_lambda=*/false);
    add_grid(c_sp, "lambda", sp.lambda_grid);
    c_sp->add_option("--levels", sp.levels, "number of eigenvalues per point")->default_val(10);
    c_sp->add_option("--ktr", sp.k_trunc, "displaced-basis truncation (0 = auto)")
        ->default_val(6);
    c_sp->add_option("--dfs-ntr", sp.dfs_ntr,
                     "also emit Fock-basis ground energies at these photon truncations");

    PhotonSweepJob ps;
    auto* c_ps = app.add_subcommand("photon-sweep", "ground-state photon number vs coupling");
    add_model(c_ps, ps.base, /*with_lambda=*/false);
    add_grid(c_ps, "lambda", ps.lambda_grid);
    c_ps->add_option("--rel-tol", ps.rel_tol, "convergence tolerance")->default_val(1e-6);

    PhaseDiagramJob pd;
    auto* c_pd = app.add_subcommand("phase-diagram", "photon number over the (lambda, U) plane");
    add_model(c_pd, pd.base, /*with_lambda=*/false, /*with_u=*/false);
    add_grid(c_pd, "lambda", pd.lambda_grid);
    add_grid(c_pd, "u", pd.u_grid);
    c_pd->add_option("--rel-tol", pd.rel_tol, "convergence tolerance")->default_val(1e-6);
    c_pd->add_flag("--allow-large-n", pd.allow_large_n, "permit N > 32 (slow)");

    DynamicsJob dy;
    auto* c_dy = app.add_subcommand("dynamics", "closed-system photon dynamics");
    add_model(c_dy, dy.base);
    c_dy->add_option("--ktr", dy.k_trunc, "displaced-basis truncation (0 = auto)")
        ->default_val(50);
    c_dy->add_option("--t-max", dy.t_max, "time horizon")->default_val(20.0);
    c_dy->add_option("--t-points", dy.t_points, "sample count")->default_val(401);

    G2SweepJob g2;
    auto* c_g2 = app.add_subcommand("g2-sweep", "zero-delay two-photon correlation vs coupling");
    add_model(c_g2, g2.base, /*with_lambda=*/false);
    add_grid(c_g2, "lambda", g2.lambda_grid);
    c_g2->add_option("--T", g2.temperature, "temperature")->default_val(0.1);
    c_g2->add_option("--ktr", g2.k_trunc, "displaced-basis truncation (0 = auto)")
        ->default_val(50);
    c_g2->add_option("--rel-tol", g2.rel_tol, "level-doubling tolerance")->default_val(1e-4);
    c_g2->add_option("--weight-cut", g2.weight_cut, "Gibbs tail cut")->default_val(1e-12);

    StatsSweepJob st;
    auto* c_st = app.add_subcommand("stats-sweep", "negativity and spin squeezing vs coupling");
    add_model(c_st, st.base, /*with_lambda=*/false);
    add_grid(c_st, "lambda", st.lambda_grid);
    c_st->add_option("--T", st.temperature, "temperature")->default_val(0.1);
    c_st->add_option("--ktr", st.k_trunc, "displaced-basis truncation (0 = auto)")
        ->default_val(50);
    c_st->add_option("--weight-cut", st.weight_cut, "Gibbs tail cut")->default_val(1e-12);
    c_st->add_option("--observables", st.observables, "subset of {negativity, squeezing}")
        ->default_val(st.observables);

    RelaxJob rx;
    auto* c_rx = app.add_subcommand("relax", "dressed master-equation trajectory");
    add_model(c_rx, rx.base);
    c_rx->add_option("--T", rx.temperature, "bath temperature")->default_val(0.5);
    c_rx->add_option("--alpha", rx.bath_alpha, "Ohmic coupling strength")->default_val(0.001);
    c_rx->add_option("--omega-c", rx.omega_c, "Ohmic cutoff")->default_val(10.0);
    c_rx->add_option("--ktr", rx.k_trunc, "displaced-basis truncation (0 = auto)")
        ->default_val(50);
    c_rx->add_option("--levels", rx.levels, "eigenstate truncation M (0 = auto)")->default_val(0);
    c_rx->add_option("--t-max", rx.t_max, "horizon (0 = 50 / (pi alpha omega))")->default_val(0.0);
    c_rx->add_option("--t-points", rx.t_points, "sample count")->default_val(101);
    c_rx->add_option("--initial", rx.initial, "gibbs | perturbed | ground")
        ->default_val("perturbed");
    c_rx->add_option("--channels", rx.channels, "both | field | atomic")->default_val("both");
    c_rx->add_option("--weight-cut", rx.weight_cut, "Gibbs tail cut")->default_val(1e-12);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc == 0) return kOk;
        report_error(kInvalidConfig, e.what());
        return kInvalidConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (global.out_path.empty()) global.out_path = sub->get_name() + ".csv";
    if (global.cache_dir.empty()) {
        if (const char* env = std::getenv("DSM_CACHE_DIR")) global.cache_dir = env;
    }

    std::unique_ptr<dsm::DecompositionCache> cache;
    if (!global.cache_dir.empty()) {
        cache = std::make_unique<dsm::DecompositionCache>(global.cache_dir);
    }
    const Runtime rt{global, cache.get()};

    try {
        if (sub == c_mf) return mf.run(rt);
        if (sub == c_sp) return sp.run(rt);
        if (sub == c_ps) return ps.run(rt);
        if (sub == c_pd) return pd.run(rt);
        if (sub == c_dy) return dy.run(rt);
        if (sub == c_g2) return g2.run(rt);
        if (sub == c_st) return st.run(rt);
        if (sub == c_rx) return rx.run(rt);
        throw std::logic_error("unhandled subcommand");
    } catch (const std::exception& e) {
        const int code = classify(e);
        report_error(code, e.what());
        return code;
    }
}
