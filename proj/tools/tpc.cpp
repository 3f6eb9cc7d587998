#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tpc/ainf.hpp"
#include "tpc/entropy.hpp"
#include "tpc/filtered_complex.hpp"
#include "tpc/fukaya_models.hpp"
#include "tpc/hochschild.hpp"
#include "tpc/morse.hpp"
#include "tpc/novikov_complex.hpp"
#include "tpc/persistence.hpp"

using nlohmann::json;
using namespace tpc;

namespace {

constexpr int kOk = 0;
constexpr int kVerificationFailure = 2;
constexpr int kCoverageGap = 3;
constexpr int kParseError = 4;

struct cli_parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cli_parse_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw cli_parse_error(path + ": " + e.what());
    }
}

Rational parse_rational(const std::string& s, const std::string& flag) {
    try {
        return Rational::parse(s);
    } catch (const std::exception& e) {
        throw cli_parse_error(flag + ": " + e.what());
    }
}

// Loads a structure, turning schema errors into parse errors that name the file.
template <class F>
auto load(const std::string& path, F&& f) {
    json j = read_json(path);
    try {
        return f(j);
    } catch (const json::exception& e) {
        throw cli_parse_error(path + ": " + e.what());
    } catch (const parse_error& e) {
        throw cli_parse_error(path + ": " + e.what());
    }
}

struct Output {
    std::string path;
    void write(const std::string& text) const {
        if (path.empty() || path == "-") {
            std::cout << text;
            return;
        }
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << text;
    }
    void write(const json& j) const { write(j.dump(2) + "\n"); }
};

struct ModelFlags {
    std::string kind = "single";
    std::size_t N = 2, Nx = 1, Ny = 1;
    std::string h = "0";
    std::string precision;

    void add(CLI::App* app) {
        app->set_help_flag("--help", "Print this help message and exit");
        app->add_option("--model", kind, "single | sphere | torus | parallel | nxn")
            ->check(CLI::IsMember({"single", "sphere", "torus", "parallel", "nxn"}));
        app->add_option("--N", N, "number of objects (sphere, parallel, nxn)");
        app->add_option("--Nx", Nx, "horizontal circles (torus)");
        app->add_option("--Ny", Ny, "vertical circles (torus)");
        app->add_option("--h", h, "perturbation level, p/q");
        app->add_option("--precision", precision, "truncation exponent, p/q (default TPC_PRECISION or 64)");
    }
    FukayaModel build() const {
        const Rational hh = parse_rational(h, "--h");
        const Rational P = precision.empty() ? default_precision() : parse_rational(precision, "--precision");
        if (kind == "single") return single_equator_model();
        if (kind == "sphere") return sphere_model(N, hh);
        if (kind == "torus") return torus_model(Nx, Ny, P, hh);
        if (kind == "parallel") return torus_model(N, 1, P, hh);
        return torus_model(N, N, P, hh);
    }
};

Metric parse_metric(const std::string& s) {
    if (s == "dint") return Metric::dint;
    if (s == "Dint") return Metric::Dint;
    if (s == "drint") return Metric::drint;
    throw cli_parse_error("unknown metric " + s);
}

Tensor parse_tensor(const TabulatedAInfCategory& A, const std::string& s) {
    Tensor t;
    std::stringstream ss(s);
    std::string name;
    while (std::getline(ss, name, ',')) {
        try {
            t.push_back(A.index_of(name));
        } catch (const std::exception&) {
            throw cli_parse_error("unknown generator " + name);
        }
    }
    if (t.empty()) throw cli_parse_error("empty tensor");
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Filtered persistence, A-infinity models and cone-length tools"};
    app.require_subcommand(1);
    Output out;
    app.add_option("-o,--output", out.path, "output file (default stdout)");

    // barcode
    auto* barcode = app.add_subcommand("barcode", "homology barcode of a filtered complex");
    std::string barcode_in;
    bool floer = false;
    barcode->add_option("complex", barcode_in, "complex JSON")->required();
    barcode->add_flag("--floer", floer, "Novikov coefficients: emit the concise barcode");

    // distance
    auto* distance = app.add_subcommand("distance", "distance between two barcodes");
    std::string metric = "dint", dist_a, dist_b;
    bool shift_inv = false;
    distance->add_option("--metric", metric, "dint | Dint | drint");
    distance->add_flag("--shift-invariant", shift_inv, "infimum over relative shifts");
    distance->add_option("a", dist_a, "barcode JSON")->required();
    distance->add_option("b", dist_b, "barcode JSON")->required();

    // conelength
    auto* conelength = app.add_subcommand("conelength", "weighted cone length of a filtered complex");
    std::string cone_eps = "0", cone_in, cone_mode = "target";
    bool cone_steps = false;
    conelength->add_option("--eps", cone_eps, "epsilon, p/q");
    conelength->add_option("--mode", cone_mode, "target | zero")->check(CLI::IsMember({"target", "zero"}));
    conelength->add_flag("--decomposition", cone_steps, "print the cone decomposition as JSON");
    conelength->add_option("complex", cone_in, "complex JSON")->required();

    // model
    auto* model = app.add_subcommand("model", "emit a tabulated Fukaya model");
    ModelFlags model_flags;
    std::size_t model_order = 4;
    bool model_verify = false;
    model_flags.add(model);
    model->add_option("--order", model_order, "largest tabulated order emitted and verified");
    model->add_flag("--verify", model_verify, "check the A-infinity relations up to --order");

    // certify
    auto* certify = app.add_subcommand("certify", "approximability certificate from the model witness");
    ModelFlags cert_flags;
    cert_flags.add(certify);

    // hochschild
    auto* hoch = app.add_subcommand("hochschild", "Hochschild barcode or chain evaluation");
    ModelFlags hoch_flags;
    std::size_t hoch_nmax = 3;
    std::optional<int> hoch_degree;
    std::string hoch_chain;
    hoch_flags.add(hoch);
    hoch->add_option("--nmax", hoch_nmax, "length filtration bound");
    hoch->add_option("--degree", hoch_degree, "restrict to one degree");
    hoch->add_option("--chain", hoch_chain, "chain JSON: report cycle, level, d_CC and OC");

    // entropy
    auto* entropy = app.add_subcommand("entropy", "entropy estimates");
    entropy->require_subcommand(1);
    auto* dehn = entropy->add_subcommand("dehn", "Dehn twist on the sphere");
    std::size_t dehn_kmax = 50;
    std::string dehn_eps = "1/32";
    dehn->add_option("--kmax", dehn_kmax, "largest iterate");
    dehn->add_option("--eps", dehn_eps, "eps', p/q");
    auto* geod = entropy->add_subcommand("geodesic", "geodesic length spectrum action model");
    std::string geod_spec;
    double geod_htop = 1, geod_delta = 1, geod_sigma = EtaProfile{}.sigma;
    int geod_nmin = 10, geod_nmax = 40;
    geod->add_option("--spectrum", geod_spec, "file with one length per line (default synthetic)");
    geod->add_option("--htop", geod_htop, "growth rate of the synthetic spectrum");
    geod->add_option("--delta", geod_delta, "bar length threshold");
    geod->add_option("--sigma", geod_sigma, "slope of the radial profile");
    geod->add_option("--nmin", geod_nmin, "first iterate");
    geod->add_option("--nmax", geod_nmax, "last iterate");

    // morse
    auto* morse_cmd = app.add_subcommand("morse", "small-variation Morse function");
    double mK = 0.1, mdelta = 0.5, meta = 1e-3;
    int mdim = 1;
    std::size_t mgrid = 10000;
    std::string mcsv;
    morse_cmd->add_option("--K", mK, "variation bound");
    morse_cmd->add_option("--delta", mdelta, "gradient bound");
    morse_cmd->add_option("--eta", meta, "critical ball radius");
    morse_cmd->add_option("--dim", mdim, "1 (circle) or 2 (torus)")->check(CLI::IsMember({1, 2}));
    morse_cmd->add_option("--grid", mgrid, "samples per axis");
    morse_cmd->add_option("--csv", mcsv, "write the sampled profile");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "compare a tabulated value with geometric enumeration");
    ModelFlags oracle_flags;
    std::string oracle_tensor, oracle_output;
    oracle_flags.add(oracle);
    oracle->add_option("--tensor", oracle_tensor, "comma separated generator names")->required();
    oracle->add_option("--mu", oracle_output, "output generator of mu (default: OC coefficient of u)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParseError;
    }

    try {
        if (*barcode) {
            if (floer) {
                auto C = load(barcode_in, [](const json& j) { return FloerComplex::from_json(j); });
                out.write(concise_barcode(C).to_json());
            } else {
                auto C = load(barcode_in, [](const json& j) { return FilteredComplex::from_json(j); });
                out.write(homology_barcode(C).to_json());
            }
            return kOk;
        }
        if (*distance) {
            const Metric m = parse_metric(metric);
            auto A = load(dist_a, [](const json& j) { return Barcode::from_json(j); });
            auto B = load(dist_b, [](const json& j) { return Barcode::from_json(j); });
            out.write((shift_inv ? shift_invariant(m, A, B) : metric_value(m, A, B)).str() + "\n");
            return kOk;
        }
        if (*conelength) {
            const Rational eps = parse_rational(cone_eps, "--eps");
            auto C = load(cone_in, [](const json& j) { return FilteredComplex::from_json(j); });
            auto r = cone_length(C, eps, cone_mode == "target" ? ConeMode::to_target : ConeMode::to_zero);
            if (cone_steps) {
                json j;
                j["cone_length"] = r.value;
                j["start"] = r.decomposition.start.to_json();
                j["steps"] = json::array();
                for (const auto& s : r.decomposition.steps)
                    j["steps"].push_back({{"name", s.name}, {"shift", s.alpha.str()}, {"translation", s.translation}});
                out.write(j);
            } else {
                out.write(std::to_string(r.value) + "\n");
            }
            return kOk;
        }
        if (*model) {
            auto M = model_flags.build();
            json j = M.category.to_json(model_order);
            j["model"] = M.describe();
            if (model_verify) {
                auto rep = verify_ainf(M.category, model_order);
                j["verification"] = rep.to_json();
                out.write(j);
                return rep.passed() ? kOk : kVerificationFailure;
            }
            out.write(j);
            return kOk;
        }
        if (*certify) {
            auto M = cert_flags.build();
            try {
                auto c = approximability_certificate(M);
                out.write(c.to_json(M.category));
            } catch (const certificate_error& e) {
                std::cerr << "certificate failed: " << e.what() << "\n";
                return kVerificationFailure;
            }
            return kOk;
        }
        if (*hoch) {
            auto M = hoch_flags.build();
            const auto& A = M.category;
            if (hoch_chain.empty()) {
                out.write(hochschild_barcode(A, hoch_nmax, hoch_degree).to_json());
                return kOk;
            }
            auto c = load(hoch_chain, [&](const json& j) {
                try {
                    return chain_from_json(A, j);
                } catch (const std::out_of_range& e) {
                    throw cli_parse_error(e.what());
                }
            });
            json j;
            auto d = dcc(A, c);
            j["cycle"] = d.empty();
            auto lvl = chain_level(A, c);
            j["level"] = lvl ? json(lvl->str()) : json(nullptr);
            j["dcc"] = chain_to_json(A, d);
            if (d.empty()) {
                auto oc = oc_evaluate(M, c);
                j["oc"] = oc.to_json();
                auto ol = qh_level(oc);
                j["oc_level"] = ol ? json(ol->str()) : json(nullptr);
            }
            out.write(j);
            return kOk;
        }
        if (*dehn) {
            const Rational eps = parse_rational(dehn_eps, "--eps");
            json j;
            j["eps_prime"] = eps.str();
            j["iterates"] = json::array();
            std::vector<double> lb;
            bool ok = true;
            for (std::size_t k = 1; k <= dehn_kmax; ++k) {
                auto D = dehn_sphere_model(k, eps);
                const auto L = lower_bound_conelength(std::vector<ConciseBarcode>{concise_barcode(D.complex)}, Rational(1), eps);
                lb.push_back(static_cast<double>(L));
                ok = ok && D.bar_count >= k;
                j["iterates"].push_back({{"k", k}, {"bars", D.bar_count}, {"certified", D.certified_count}, {"lower_bound", L}});
            }
            if (lb.size() >= 3 && lb.front() > 0) {
                auto est = entropy_estimate(lb, EntropyMode::slow);
                j["slow_entropy_float"] = est.value;
                j["window"] = {est.first, est.last};
            }
            j["bars_at_least_k"] = ok;
            out.write(j);
            return ok ? kOk : kVerificationFailure;
        }
        if (*geod) {
            LengthSpectrum spec;
            if (geod_spec.empty()) {
                spec = synthetic_spectrum(geod_htop, geod_sigma * geod_nmax + 1);
            } else {
                std::ifstream in(geod_spec);
                if (!in) throw cli_parse_error("cannot open " + geod_spec);
                try {
                    spec = parse_spectrum(in);
                } catch (const std::invalid_argument& e) {
                    throw cli_parse_error(geod_spec + ": " + e.what());
                }
            }
            EtaProfile eta;
            eta.sigma = geod_sigma;
            try {
                eta.validate();
            } catch (const std::invalid_argument& e) {
                throw cli_parse_error(std::string("--sigma: ") + e.what());
            }
            json j;
            j["counts"] = json::array();
            std::vector<double> counts;
            for (int n = geod_nmin; n <= geod_nmax; ++n) {
                auto A = floer_action_model(spec, eta, n, geod_delta);
                counts.push_back(static_cast<double>(std::max<std::uint64_t>(A.count, 1)));
                j["counts"].push_back({{"n", n}, {"bars", A.count}, {"certified", A.certified_count}});
            }
            if (counts.size() >= 3) {
                auto est = entropy_estimate(counts, EntropyMode::exponential, 1);
                j["log_slope_float"] = est.value;
            }
            out.write(j);
            return kOk;
        }
        if (*morse_cmd) {
            morse::PiecewiseProfile f;
            try {
                f = morse::build_1d(mdim == 2 ? mK / 2 : mK, mdelta, mdim == 2 ? meta / std::sqrt(2.0) : meta);
            } catch (const morse::infeasible_parameters& e) {
                throw cli_parse_error(e.what());
            }
            if (mdim == 2) f = morse::torus_product(f, f);
            auto rep = morse::verify(f, mgrid);
            if (!mcsv.empty()) {
                std::ofstream csv(mcsv);
                if (!csv) throw std::runtime_error("cannot write " + mcsv);
                morse::write_csv(csv, f, mgrid);
            }
            json j;
            j["passed"] = rep.passed;
            j["critical_points"] = rep.declared;
            j["min_float"] = rep.min;
            j["max_float"] = rep.max;
            j["min_gradient_outside_float"] = rep.min_gradient_outside;
            j["violations"] = rep.violations;
            out.write(j);
            return rep.passed ? kOk : kVerificationFailure;
        }
        if (*oracle) {
            auto M = oracle_flags.build();
            const auto& A = M.category;
            const Tensor t = parse_tensor(A, oracle_tensor);
            json j;
            j["tensor"] = A.names(t);
            NovikovElement tab, ora;
            if (oracle_output.empty()) {
                auto v = oc_lookup(M, t);
                if (!v) throw coverage_gap("OC not tabulated on " + A.render(t), A.names(t));
                tab = v->coefficient("u");
                ora = oracle_enumerate(M, {"oc", t, std::nullopt});
            } else {
                const auto o = parse_tensor(A, oracle_output).front();
                const auto v = A.mu_or_throw(t);
                auto it = v.find(o);
                tab = it == v.end() ? NovikovElement::zero() : it->second;
                ora = oracle_enumerate(M, {"mu", t, o});
            }
            j["tabulated"] = tab.str();
            j["oracle"] = ora.str();
            const bool agree = tab.agrees_with(ora);
            j["agree"] = agree;
            out.write(j);
            return agree ? kOk : kVerificationFailure;
        }
    } catch (const coverage_gap& e) {
        std::cerr << "coverage gap: " << e.what() << "\n";
        return kCoverageGap;
    } catch (const cli_parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kOk;
}
