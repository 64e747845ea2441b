// spdsysid: generate data, fit, evaluate and export phase portraits.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
// 4 numerical failure.

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spdsysid/spdsysid.hpp"

#ifndef SPDSYSID_VERSION
#define SPDSYSID_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace spdsysid;
using io::json;

namespace {

enum Exit : int { ok = 0, usage = 2, io_failure = 3, numerical = 4 };

std::string hex(const unsigned char* bytes, std::size_t n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(digits[bytes[i] >> 4]);
        out.push_back(digits[bytes[i] & 0xf]);
    }
    return out;
}

std::string sha256(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    return hex(digest, len);
}

std::string file_sha256(const std::string& path) { return sha256(io::read_text_file(path)); }

/// Independent stream seed derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// Artifacts written into one output directory, recorded in manifest.json.
class RunManifest {
public:
    RunManifest(std::string subcommand, std::string out_dir, std::uint64_t seed)
        : subcommand_(std::move(subcommand)), out_dir_(std::move(out_dir)), seed_(seed) {
        std::error_code ec;
        fs::create_directories(out_dir_, ec);
        if (ec || !fs::is_directory(out_dir_)) throw IoError("cannot create output directory '" + out_dir_ + "'");
    }

    [[nodiscard]] std::string path(const std::string& name) const { return (fs::path(out_dir_) / name).string(); }

    void input(const std::string& role, const std::string& file) {
        inputs_.push_back({{"role", role}, {"path", file}, {"sha256", file_sha256(file)}});
    }
    void config(const std::string& key, json value) { config_[key] = std::move(value); }

    /// Writes `text` to out_dir/name and records its hash.
    void write(const std::string& name, const std::string& text) {
        io::write_text_file(path(name), text);
        artifacts_.push_back({{"file", name}, {"sha256", sha256(text)}, {"bytes", text.size()}});
        std::cout << "wrote " << path(name) << '\n';
    }

    void finish() {
        const json manifest{{"tool", "spdsysid"},     {"version", SPDSYSID_VERSION}, {"subcommand", subcommand_},
                            {"seed", seed_},          {"output_dir", out_dir_},      {"inputs", inputs_},
                            {"config", config_},      {"artifacts", artifacts_}};
        io::write_text_file(path("manifest.json"), io::dump(manifest));
        std::cout << "wrote " << path("manifest.json") << '\n';
    }

    [[nodiscard]] data::csv::Metadata metadata() const {
        return {{"seed", std::to_string(seed_)}, {"tool", std::string("spdsysid ") + SPDSYSID_VERSION}};
    }

private:
    std::string subcommand_;
    std::string out_dir_;
    std::uint64_t seed_;
    json inputs_ = json::array();
    json config_ = json::object();
    json artifacts_ = json::array();
};

template <class F>
std::string render(F&& write) {
    std::ostringstream out;
    write(out);
    return out.str();
}

// generate ----------------------------------------------------------------

struct GenerateOptions {
    std::string spec_path;
    std::string forcing = "london";
    std::size_t nodes = 10;
    double noise = 0.05;
    std::uint64_t seed = 0;
    std::size_t length = data::default_series_length;
    std::string out_dir;
};

void cmd_generate(const GenerateOptions& o) {
    const auto spec = io::load_material(o.spec_path);
    RunManifest run("generate", o.out_dir, o.seed);
    run.input("spec", o.spec_path);

    ForcingSeries forcing;
    const std::uint64_t forcing_seed = derive_seed(o.seed, 1);
    if (o.forcing == "london" || o.forcing == "chicago") {
        auto profile = o.forcing == "london" ? data::ForcingProfile::london(forcing_seed)
                                             : data::ForcingProfile::chicago(forcing_seed);
        profile.length = o.length;
        forcing = data::synth_forcing(profile);
    } else {
        forcing = data::load_forcing_csv(o.forcing);
        run.input("forcing", o.forcing);
    }

    data::GeneratorConfig gen;
    gen.fidelity_nodes = o.nodes;
    gen.noise_std = o.noise;
    gen.seed = derive_seed(o.seed, 2);
    const auto traj = data::generate_target_data(spec, forcing, gen);

    run.config("forcing", o.forcing);
    run.config("nodes", o.nodes);
    run.config("noise_std", o.noise);
    run.config("length", forcing.size());
    run.config("forcing_seed", forcing_seed);
    run.config("noise_seed", gen.seed);
    run.config("dt", gen.dt);
    run.write("forcing.csv", render([&](std::ostream& out) { data::write_forcing_csv(out, forcing, run.metadata()); }));
    run.write("trajectory.csv", render([&](std::ostream& out) { data::write_trajectory_csv(out, traj, run.metadata()); }));
    run.finish();
}

// fit ---------------------------------------------------------------------

struct FitOptions {
    std::string spec_path;
    std::string trajectory_path;
    std::vector<std::string> methods{"riemannian"};
    std::size_t epochs = 2000;
    double lr_a = 1e-3;
    double lr_b = 1e-3;
    double split = 0.7;
    std::size_t nodes = 2;
    double dt = 3600.0;
    std::size_t patience = 50;
    std::optional<double> threshold;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::string out_dir;
};

void cmd_fit(const FitOptions& o) {
    std::vector<sysid::Method> methods;
    for (const auto& m : o.methods) {
        const auto parsed = sysid::parse_method(m);
        if (std::find(methods.begin(), methods.end(), parsed) != methods.end()) {
            throw InvalidArgument("method '" + m + "' given twice");
        }
        methods.push_back(parsed);
    }
    const auto spec = io::load_material(o.spec_path);
    const auto traj = data::load_trajectory_csv(o.trajectory_path);
    const auto parts = data::split(traj, o.split);
    const auto physics =
        model::discretize_network(model::build_network(spec, o.nodes), o.dt, parts.train.forcing.mean());

    RunManifest run("fit", o.out_dir, o.seed);
    run.input("spec", o.spec_path);
    run.input("trajectory", o.trajectory_path);

    std::vector<sysid::FitConfig> configs;
    for (auto m : methods) {
        sysid::FitConfig cfg;
        cfg.method = m;
        cfg.epochs = o.epochs;
        cfg.learning_rate_a = o.lr_a;
        cfg.learning_rate_b = o.lr_b;
        cfg.patience = o.patience;
        cfg.seed = o.seed;
        cfg.threshold = o.threshold;
        cfg.validate();
        configs.push_back(cfg);
    }

    // at most `jobs` fits in flight; results keep the command-line order
    std::vector<sysid::FitResult> results(configs.size());
    for (std::size_t start = 0; start < configs.size(); start += o.jobs) {
        std::vector<std::future<sysid::FitResult>> batch;
        for (std::size_t k = start; k < std::min(configs.size(), start + o.jobs); ++k) {
            batch.push_back(std::async(o.jobs > 1 ? std::launch::async : std::launch::deferred,
                                       [&, k] { return sysid::fit(physics, parts.train, configs[k]); }));
        }
        for (std::size_t k = 0; k < batch.size(); ++k) results[start + k] = batch[k].get();
    }

    run.config("methods", o.methods);
    run.config("epochs", o.epochs);
    run.config("lr_a", o.lr_a);
    run.config("lr_b", o.lr_b);
    run.config("split", o.split);
    run.config("nodes", o.nodes);
    run.config("dt", o.dt);
    run.config("patience", o.patience);
    run.config("jobs", o.jobs);
    if (o.threshold) run.config("threshold", *o.threshold);

    const auto meta = run.metadata();
    const std::map<std::string, std::string> provenance{{"seed", std::to_string(o.seed)},
                                                        {"spec_sha256", file_sha256(o.spec_path)},
                                                        {"trajectory_sha256", file_sha256(o.trajectory_path)}};
    run.write("train.csv", render([&](std::ostream& out) { data::write_trajectory_csv(out, parts.train, meta); }));
    run.write("test.csv", render([&](std::ostream& out) { data::write_trajectory_csv(out, parts.test, meta); }));
    auto physics_prov = provenance;
    physics_prov["method"] = "physics";
    run.write("model_physics.json", io::dump(io::model_to_json(physics, physics_prov)));

    for (const auto& r : results) {
        const std::string name(sysid::to_string(r.method));
        auto prov = provenance;
        prov["method"] = name;
        prov["epochs_run"] = std::to_string(r.loss_trace.size());
        run.write("model_" + name + ".json", io::dump(io::model_to_json(r.model(), prov)));
        run.write("loss_" + name + ".csv", render([&](std::ostream& out) {
                      data::csv::write_metadata(out, meta);
                      out << "epoch,loss\n0," << data::csv::format_double(r.initial_loss) << '\n';
                      for (std::size_t e = 0; e < r.loss_trace.size(); ++e) {
                          out << e + 1 << ',' << data::csv::format_double(r.loss_trace[e]) << '\n';
                      }
                  }));
        std::cout << name << ": loss " << r.initial_loss << " -> " << r.final_loss() << " after "
                  << r.loss_trace.size() << " epochs, phi_a SPD " << (r.phi_a_spd ? "yes" : "no") << '\n';
    }

    if (o.threshold) {
        const auto rows = report::compare_convergence(results, *o.threshold);
        run.write("convergence.csv", render([&](std::ostream& out) {
                      data::csv::write_metadata(out, meta);
                      out << "method,seed,epochs_to_threshold\n";
                      for (const auto& row : rows) {
                          for (std::size_t k = 0; k < row.seeds.size(); ++k) {
                              out << row.method << ',' << row.seeds[k] << ','
                                  << (row.epochs[k] ? std::to_string(*row.epochs[k]) : "none") << '\n';
                          }
                      }
                  }));
    }
    run.finish();
}

// evaluate ----------------------------------------------------------------

struct EvaluateOptions {
    std::vector<std::string> models;
    std::vector<std::string> trajectories;
    std::uint64_t seed = 0;
    std::string out_dir;
};

std::string model_label(const std::string& path) {
    const auto j = io::parse_json_text(io::read_text_file(path), path);
    if (j.contains("provenance") && j["provenance"].is_object() && j["provenance"].contains("method") &&
        j["provenance"]["method"].is_string()) {
        return j["provenance"]["method"].get<std::string>();
    }
    return fs::path(path).stem().string();
}

json eigen_json(const report::EigenReport& r) {
    json j{{"symmetric", r.symmetric},
           {"spd", r.spd},
           {"stable", r.stable},
           {"spectral_radius", r.spectral_radius},
           {"eigenvalues", r.eigenvalues}};
    if (r.symmetric) {
        j["eigenvectors"] = io::matrix_to_json(r.eigenvectors);
        j["min_eigenvalue"] = r.min_eigenvalue;
    }
    return j;
}

void cmd_evaluate(const EvaluateOptions& o) {
    if (o.trajectories.empty()) throw InvalidArgument("at least one trajectory is required");
    std::vector<std::pair<std::string, model::DiscreteLti>> models;
    std::set<std::string> labels;
    for (const auto& path : o.models) {
        auto label = model_label(path);
        if (!labels.insert(label).second) throw InvalidArgument("two models share the label '" + label + "'");
        models.emplace_back(std::move(label), io::load_model(path));
    }
    std::vector<std::pair<std::string, Trajectory>> datasets;
    std::set<std::string> names;
    for (const auto& path : o.trajectories) {
        auto name = fs::path(path).stem().string();
        if (!names.insert(name).second) throw InvalidArgument("two trajectories share the name '" + name + "'");
        datasets.emplace_back(std::move(name), data::load_trajectory_csv(path));
    }

    RunManifest run("evaluate", o.out_dir, o.seed);
    for (const auto& path : o.models) run.input("model", path);
    for (const auto& path : o.trajectories) run.input("trajectory", path);
    const auto meta = run.metadata();

    report::EvalTable table;
    table.metadata = meta;
    for (const auto& [name, traj] : datasets)
        for (const auto& l : traj.labels) table.columns.push_back(l + "/" + name);

    json eigen = json::object();
    for (const auto& [label, m] : models) {
        std::vector<double> row;
        for (const auto& [name, traj] : datasets) {
            const auto mse = report::evaluate(m, traj);
            row.insert(row.end(), mse.begin(), mse.end());
            const auto predicted = model::simulate(m, traj.state(0), traj.forcing, traj.labels);
            for (std::size_t j = 0; j < traj.state_dim(); ++j) {
                run.write("prediction_" + label + "_" + name + "_" + traj.labels[j] + ".csv",
                          render([&](std::ostream& out) { report::write_prediction_csv(out, traj, predicted, j, meta); }));
            }
        }
        table.add_row(label, std::move(row));
        eigen[label] = eigen_json(report::eigen_report(m));
    }
    run.write("eval.csv", render([&](std::ostream& out) { table.write_csv(out); }));
    const std::string text = render([&](std::ostream& out) { table.write_text(out); });
    run.write("eval.txt", text);
    run.write("eigen.json", io::dump(json{{"seed", o.seed}, {"models", eigen}}));
    run.finish();
    std::cout << text;
}

// portrait ----------------------------------------------------------------

struct PortraitOptions {
    std::string model_path;
    std::string spec_path;
    std::size_t nodes = 2;
    model::PortraitGrid grid;
    std::uint64_t seed = 0;
    std::string out_dir;
};

void cmd_portrait(const PortraitOptions& o) {
    model::ContinuousLti sys;
    if (!o.model_path.empty()) {
        const auto m = io::load_model(o.model_path);
        if (m.state_dim() != 2) throw UnsupportedDimension("phase portraits need a 2-state model");
        // construction would symmetrize, so check the stored matrix first
        const auto spd = sysid::is_spd(m.phi_a) ? SpdMatrix::try_make(m.phi_a) : std::nullopt;
        if (!spd) throw NotPositiveDefinite("phi_a is not SPD, so it has no real symmetric generator");
        // A = log(Φ_A)/dt in the model's working coordinates
        sys = {logm_spd(*spd).matrix() * (1.0 / m.dt), m.phi_b};
    } else {
        const auto net = model::build_network(io::load_material(o.spec_path), o.nodes);
        sys = model::canonical_coordinates(model::assemble_continuous(net), net).first;
    }
    const auto portrait = model::phase_portrait(sys, o.grid);

    RunManifest run("portrait", o.out_dir, o.seed);
    if (!o.model_path.empty()) run.input("model", o.model_path);
    if (!o.spec_path.empty()) run.input("spec", o.spec_path);
    run.config("xmin", o.grid.x_min);
    run.config("xmax", o.grid.x_max);
    run.config("ymin", o.grid.y_min);
    run.config("ymax", o.grid.y_max);
    run.config("resolution", o.grid.resolution);
    if (!o.spec_path.empty()) run.config("nodes", o.nodes);
    const auto meta = run.metadata();
    using data::csv::format_double;
    run.write("portrait.csv", render([&](std::ostream& out) {
                  data::csv::write_metadata(out, meta);
                  out << "x,y,dx,dy\n";
                  for (const auto& s : portrait.field) {
                      out << format_double(s.x) << ',' << format_double(s.y) << ',' << format_double(s.dx) << ','
                          << format_double(s.dy) << '\n';
                  }
              }));
    run.write("eigen_rays.csv", render([&](std::ostream& out) {
                  data::csv::write_metadata(out, meta);
                  out << "eigenvalue,vx,vy\n";
                  for (const auto& r : portrait.rays) {
                      out << format_double(r.eigenvalue) << ',' << format_double(r.vx) << ',' << format_double(r.vy)
                          << '\n';
                  }
              }));
    run.finish();
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return io_failure;
    if (dynamic_cast<const NonFiniteLoss*>(&e) || dynamic_cast<const NotPositiveDefinite*>(&e) ||
        dynamic_cast<const SingularMatrix*>(&e) || dynamic_cast<const SingularTransform*>(&e) ||
        dynamic_cast<const ConvergenceFailure*>(&e)) {
        return numerical;
    }
    return usage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Identify SPD linear thermal models from temperature data"};
    app.set_version_flag("--version", SPDSYSID_VERSION);
    app.require_subcommand(1);

    GenerateOptions gen;
    auto* g = app.add_subcommand("generate", "Synthesize a forcing year and noisy measurements");
    g->add_option("spec", gen.spec_path, "Material spec JSON")->required();
    g->add_option("--forcing", gen.forcing, "london, chicago, or a forcing CSV path")->capture_default_str();
    g->add_option("--nodes", gen.nodes, "Nodes of the generating network")->capture_default_str()->check(CLI::Range(2, 1000));
    g->add_option("--noise", gen.noise, "Measurement noise std, K")->capture_default_str()->check(CLI::NonNegativeNumber);
    g->add_option("--seed", gen.seed, "Seed for all randomness")->capture_default_str();
    g->add_option("--length", gen.length, "Hours of synthetic forcing")->capture_default_str()->check(CLI::PositiveNumber);
    g->add_option("--out-dir", gen.out_dir, "Output directory")->required();

    FitOptions fit;
    auto* f = app.add_subcommand("fit", "Fit a model from the physics initial guess");
    f->add_option("spec", fit.spec_path, "Material spec JSON for the initial guess")->required();
    f->add_option("trajectory", fit.trajectory_path, "Trajectory CSV")->required();
    f->add_option("--method", fit.methods, "riemannian, euclidean or cholesky; repeat to fit several")
        ->allow_extra_args(false)
        ->capture_default_str()
        ->check(CLI::IsMember({"riemannian", "euclidean", "cholesky"}));
    f->add_option("--epochs", fit.epochs, "Maximum epochs")->capture_default_str()->check(CLI::PositiveNumber);
    f->add_option("--lr-a", fit.lr_a, "Learning rate for phi_a")->capture_default_str()->check(CLI::PositiveNumber);
    f->add_option("--lr-b", fit.lr_b, "Learning rate for phi_b")->capture_default_str()->check(CLI::PositiveNumber);
    f->add_option("--split", fit.split, "Training fraction")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    f->add_option("--nodes", fit.nodes, "Nodes of the initial model")->capture_default_str()->check(CLI::Range(2, 1000));
    f->add_option("--dt", fit.dt, "Sample interval, s")->capture_default_str()->check(CLI::PositiveNumber);
    f->add_option("--patience", fit.patience, "Plateau epochs before stopping, 0 disables")->capture_default_str();
    f->add_option("--threshold", fit.threshold, "Loss threshold for the convergence table");
    f->add_option("--seed", fit.seed, "Seed recorded with the run")->capture_default_str();
    f->add_option("--jobs", fit.jobs, "Fits to run in parallel")->capture_default_str()->check(CLI::PositiveNumber);
    f->add_option("--out-dir", fit.out_dir, "Output directory")->required();

    EvaluateOptions ev;
    auto* e = app.add_subcommand("evaluate", "Free-running MSE of models on trajectories");
    e->add_option("--model", ev.models, "Model JSON; repeat for several")->required()->allow_extra_args(false);
    e->add_option("trajectories", ev.trajectories, "Trajectory CSVs")->required();
    e->add_option("--seed", ev.seed, "Seed recorded with the run")->capture_default_str();
    e->add_option("--out-dir", ev.out_dir, "Output directory")->required();

    PortraitOptions po;
    auto* p = app.add_subcommand("portrait", "Vector field of the unforced dynamics of a 2-state model");
    auto* pm = p->add_option("--model", po.model_path, "Model JSON");
    auto* ps = p->add_option("--spec", po.spec_path, "Material spec JSON");
    pm->excludes(ps);
    p->add_option("--nodes", po.nodes, "Nodes when building from a spec")->capture_default_str();
    p->add_option("--xmin", po.grid.x_min)->capture_default_str();
    p->add_option("--xmax", po.grid.x_max)->capture_default_str();
    p->add_option("--ymin", po.grid.y_min)->capture_default_str();
    p->add_option("--ymax", po.grid.y_max)->capture_default_str();
    p->add_option("--res", po.grid.resolution, "Points per axis")->capture_default_str()->check(CLI::PositiveNumber);
    p->add_option("--seed", po.seed, "Seed recorded with the run")->capture_default_str();
    p->add_option("--out-dir", po.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& s) {
        return app.exit(s);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return usage;
    }

    try {
        if (g->parsed()) cmd_generate(gen);
        if (f->parsed()) cmd_fit(fit);
        if (e->parsed()) cmd_evaluate(ev);
        if (p->parsed()) {
            if (po.model_path.empty() && po.spec_path.empty()) throw InvalidArgument("portrait needs --model or --spec");
            cmd_portrait(po);
        }
    } catch (const std::exception& err) {
        std::cerr << "spdsysid: " << err.what() << '\n';
        return exit_code_for(err);
    }
    return ok;
}
