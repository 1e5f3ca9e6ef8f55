#include "indefsl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "indefsl/bc_algebra.hpp"
#include "indefsl/error.hpp"
#include "indefsl/grid.hpp"
#include "indefsl/kernel_ops.hpp"
#include "indefsl/riesz_diag.hpp"
#include "indefsl/spectral.hpp"

namespace indefsl {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

int rank_of(Mode m)
{
    return static_cast<int>(m);
}

json cjson(cplx v)
{
    return json::array({v.real(), v.imag()});
}

json row_json(const Row4& r)
{
    json a = json::array();
    for (int k = 0; k < 4; ++k) a.push_back(cjson(r(k)));
    return a;
}

json row2_json(const Row2& r)
{
    return json::array({cjson(r(0)), cjson(r(1))});
}

json skipped(const std::string& reason)
{
    return json{{"skipped", true}, {"reason", reason}};
}

json error_json(const std::exception& e)
{
    json j;
    if (const auto* err = dynamic_cast<const Error*>(&e)) j["kind"] = to_string(err->kind());
    j["message"] = e.what();
    return j;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

Row4 rounded(const ExactRow& r)
{
    Row4 out;
    for (int k = 0; k < 4; ++k) out(k) = r[k].to_complex();
    return out;
}

json residual_json(const Row4& L, const Row4& M, const Row4& N)
{
    auto rel = [](const Row4& x, const Row4& y) {
        const double s = x.norm() * y.norm();
        return s > 0.0 ? std::abs(q_form(x, y)) / s : 0.0;
    };
    return json{{"LQL", rel(L, L)}, {"MQM", rel(M, M)}, {"NQN", rel(N, N)}, {"LQM", rel(L, M)}, {"LQN", rel(L, N)}};
}

json connection_json(const SmoothConnection& c)
{
    return json{{"a", c.a},
                {"b", c.b},
                {"side_a", to_string(c.side_a)},
                {"side_b", to_string(c.side_b)},
                {"alpha_prime", c.alpha_prime},
                {"beta_prime", c.beta_prime},
                {"scale", c.scale},
                {"eps", c.eps},
                {"rho0", c.rho0},
                {"tau", c.tau},
                {"order_gap", c.order_gap},
                {"rho_energy", c.rho_energy}};
}

bool requires_point(const ClassificationReport& cr, double point)
{
    const auto& rc = cr.required_conditions;
    if (point == 0.0) return rc.count(RequiredCondition::At0) > 0;
    if (rc.count(RequiredCondition::AtMinus1_or_AtPlus1)) return true;
    return point < 0.0 ? rc.count(RequiredCondition::AtMinus1) > 0 : rc.count(RequiredCondition::AtPlus1) > 0;
}

// Keeps the first `count` entries by modulus without splitting a conjugate pair.
std::vector<FoundEigenvalue> truncate(std::vector<FoundEigenvalue> ev, int count)
{
    if (static_cast<int>(ev.size()) <= count) return ev;
    size_t keep = static_cast<size_t>(count);
    const cplx last = ev[keep - 1].lambda;
    if (last.imag() != 0.0 && keep < ev.size() && ev[keep].lambda == std::conj(last)) ++keep;
    ev.resize(keep);
    return ev;
}

Rect scaled(const Rect& r, double f)
{
    return {r.re_lo * f, r.re_hi * f, r.im_lo * std::sqrt(f), r.im_hi * std::sqrt(f)};
}

json rect_json(const Rect& r)
{
    return json{{"re_lo", r.re_lo}, {"re_hi", r.re_hi}, {"im_lo", r.im_lo}, {"im_hi", r.im_hi}};
}

}  // namespace

std::optional<Mode> parse_mode(const std::string& text)
{
    for (Mode m : {Mode::check_bc, Mode::classify, Mode::verify_w, Mode::solve, Mode::diagnose, Mode::all})
        if (text == to_string(m)) return m;
    return std::nullopt;
}

const char* to_string(Mode m) noexcept
{
    switch (m) {
    case Mode::check_bc: return "check-bc";
    case Mode::classify: return "classify";
    case Mode::verify_w: return "verify-w";
    case Mode::solve: return "solve";
    case Mode::diagnose: return "diagnose";
    case Mode::all: return "all";
    }
    return "?";
}

PipelineOutput run_pipeline(const ProblemConfig& cfg, Mode mode)
{
    PipelineOutput out;
    json report;
    report["tool"] = "indefsl";
    report["version"] = kVersion;
    report["mode"] = to_string(mode);
    report["seed"] = cfg.seed;
    // The output location is left out so reports compare equal across directories.
    {
        std::string text = emit_config(cfg);
        text = text.substr(0, text.find("\n[output]") + 1);
        report["config"] = text;
    }

    int code = exit_code::ok;
    std::string status = "ok";
    auto degrade = [&](int c, const std::string& s) {
        if (code == exit_code::ok) {
            code = c;
            status = s;
        }
    };
    auto finish = [&]() {
        report["status"] = status;
        report["exit_code"] = code;
        out.exit_code = code;
        out.status = status;
        out.report_json = report.dump(2) + "\n";
        return out;
    };
    const int depth = rank_of(mode);

    // ---- check-bc
    BoundaryTriple t;
    const Row4 L = rounded(cfg.L), M = rounded(cfg.M), N = rounded(cfg.N);
    {
        json v;
        v["method"] = cfg.validation == Validation::exact ? "exact" : "float";
        v["rows"] = json{{"L", row_json(L)}, {"M", row_json(M)}, {"N", row_json(N)}};
        v["residuals"] = residual_json(L, M, N);
        try {
            t = cfg.validation == Validation::exact ? validate_triple_exact(cfg.L, cfg.M, cfg.N)
                                                    : validate_triple(L, M, N, cfg.bc_tol);
            v["valid"] = true;
            v["delta"] = t.delta;
        } catch (const QFormViolation& e) {
            v["valid"] = false;
            v["error"] = error_json(e);
            v["error"]["identity"] = e.identity();
            v["error"]["residual"] = e.residual();
        } catch (const Error& e) {
            v["valid"] = false;
            v["error"] = error_json(e);
        }
        report["validation"] = v;
        if (!t.validated) {
            degrade(exit_code::validation_failure, "validation_failure");
            for (const char* k : {"split", "classification", "conditions", "w_verification", "eigenvalues", "diagnostics"})
                report[k] = skipped("boundary triple failed validation");
            return finish();
        }
    }
    EchelonSplit split;
    {
        split = reduce_and_split(t, cfg.bc_tol);
        report["split"] = json{{"form_domain_case", to_string(split.form_domain_case)},
                               {"L", row_json(split.L)},
                               {"M", row_json(split.M)},
                               {"N", row_json(split.N)},
                               {"L_e", row2_json(split.L_e)},
                               {"L_n", row2_json(split.L_n)},
                               {"N_e", row2_json(split.N_e)},
                               {"N_n", row2_json(split.N_n)}};
    }

    // ---- classify
    ClassificationReport cr;
    if (depth >= rank_of(Mode::classify)) {
        cr = classify_theorem(split, t, cfg.bc_tol);
        json c{{"theorem", to_string(cr.theorem)}, {"case", cr.matched_case}, {"sign_delta", cr.sign_delta}};
        json req = json::array();
        for (auto rc : cr.required_conditions) req.push_back(to_string(rc));
        c["required_conditions"] = req;
        report["classification"] = c;
        if (cr.theorem == Theorem::None) degrade(exit_code::no_theorem, "no_theorem");
    } else {
        report["classification"] = skipped("mode stops before classify");
    }

    // ---- verify-w
    const CoefficientModel model = cfg.model();
    bool model_ok = true;
    if (depth >= rank_of(Mode::verify_w)) {
        try {
            model.validate();
        } catch (const Error& e) {
            model_ok = false;
            report["model_error"] = error_json(e);
            degrade(exit_code::numerical_failure, "invalid_model");
        }
    }
    if (depth >= rank_of(Mode::verify_w) && model_ok) {
        json conds;
        WParts parts;
        if (model.definite_weight) {
            conds = skipped("definite weight: no turning point to connect");
        } else {
            for (double point : {0.0, -1.0, 1.0}) {
                json c;
                c["required"] = requires_point(cr, point);
                try {
                    const ConditionReport rep = check_condition_at(model, point);
                    c["holds"] = rep.holds;
                    c["margin"] = rep.inequality_margin;
                    c["connection"] = rep.connection ? connection_json(*rep.connection) : json(nullptr);
                    c["diagnostics"] = rep.diagnostics;
                    if (rep.holds && rep.connection) {
                        if (point == 0.0) parts.at0 = rep.connection;
                        else if (point < 0.0) parts.at_minus1 = rep.connection;
                        else parts.at_plus1 = rep.connection;
                    }
                } catch (const Error& e) {
                    c["holds"] = false;
                    c["error"] = error_json(e);
                }
                conds[point == 0.0 ? "0" : (point < 0.0 ? "-1" : "1")] = c;
            }
        }
        report["conditions"] = conds;

        if (model.definite_weight) {
            report["w_verification"] = skipped("definite weight: W is the identity construction");
        } else if (cr.theorem == Theorem::None) {
            report["w_verification"] = skipped("no theorem applies");
        } else {
            try {
                const auto grid = make_operator_grid(model, cfg.grid_n);
                const OperatorRep w = build_full_W(grid, cr, t, parts);
                const WVerification wv = verify_W(w, split, t, cfg.verify_samples, cfg.seed);
                report["w_verification"] = json{{"recipe", w.recipe},
                                                {"grid_n", cfg.grid_n},
                                                {"samples", wv.samples},
                                                {"min_krein_ratio", wv.min_krein_ratio},
                                                {"krein_positive", wv.krein_positive},
                                                {"condition_number", wv.condition_number},
                                                {"min_psd_eigenvalue", wv.min_psd_eigenvalue},
                                                {"form_domain_residual", wv.form_domain_residual},
                                                {"continuity_residual", wv.continuity_residual},
                                                {"passed", wv.passed}};
                if (!wv.passed) degrade(exit_code::numerical_failure, "w_verification_failed");
            } catch (const Error& e) {
                report["w_verification"] = json{{"error", error_json(e)}};
                degrade(exit_code::numerical_failure, "w_construction_failed");
            }
        }
    } else if (depth < rank_of(Mode::verify_w)) {
        report["conditions"] = skipped("mode stops before verify-w");
        report["w_verification"] = skipped("mode stops before verify-w");
    } else {
        report["conditions"] = skipped("invalid coefficient model");
        report["w_verification"] = skipped("invalid coefficient model");
    }

    // ---- solve
    std::vector<SpectralDatum> data;
    bool solved = false;
    if (depth >= rank_of(Mode::solve) && model_ok) {
        json e;
        try {
            SearchOptions so;
            so.max_count = cfg.max_eigs;
            so.cluster_rel = cfg.cluster_rel;
            so.integrator.abs_tol = so.integrator.rel_tol = cfg.integrator_tol;
            Rect region = cfg.region ? *cfg.region : weyl_region(model, cfg.count);
            std::vector<FoundEigenvalue> found = find_eigenvalues(model, t, region, so);
            // The Weyl region is a heuristic: grow it until enough are found.
            for (int grow = 0; !cfg.region && static_cast<int>(found.size()) < cfg.count && grow < 4; ++grow) {
                region = scaled(region, 2.0);
                found = find_eigenvalues(model, t, region, so);
            }
            e["region"] = rect_json(region);
            e["region_source"] = cfg.region ? "config" : "weyl heuristic";
            e["found_in_region"] = found.size();
            found = truncate(found, cfg.count);

            const auto grid = make_spectral_grid(model, cfg.spectral_panels);
            json list = json::array();
            std::ostringstream csv;
            csv << "re_lambda,im_lambda,alg_mult,geo_mult,krein_sign\n";
            int nonreal = 0;
            for (const auto& f : found) {
                data.push_back(root_subspace(model, t, f.lambda, f.alg_mult, grid, so.integrator));
                const SpectralDatum& d = data.back();
                if (d.lambda.imag() != 0.0) ++nonreal;
                list.push_back(json{{"lambda", cjson(d.lambda)},
                                    {"alg_mult", d.alg_mult},
                                    {"geo_mult", d.geo_mult},
                                    {"krein_sign", d.krein_sign},
                                    {"boundary_residual", d.boundary_residual}});
                csv << fmt(d.lambda.real()) << "," << fmt(d.lambda.imag()) << "," << d.alg_mult << "," << d.geo_mult
                    << "," << d.krein_sign << "\n";
            }
            e["count"] = data.size();
            e["nonreal_count"] = nonreal;
            e["list"] = list;
            out.eigenvalues_csv = csv.str();

            // Independent finite element check of the leading eigenvalues.
            json fem;
            try {
                const auto fe = fem_cross_check(model, t, cfg.fem_elements);
                double worst = 0.0;
                json pairs = json::array();
                const size_t lead = std::min<size_t>(10, data.size());
                for (size_t k = 0; k < lead; ++k) {
                    const cplx l = data[k].lambda;
                    cplx best = fe.empty() ? cplx(NAN, NAN) : fe.front();
                    for (const auto& v : fe)
                        if (std::abs(v - l) < std::abs(best - l)) best = v;
                    const double rel = std::abs(best - l) / std::max(std::abs(l), 1e-300);
                    worst = std::max(worst, rel);
                    pairs.push_back(json{{"shooting", cjson(l)}, {"fem", cjson(best)}, {"rel_diff", rel}});
                }
                fem = json{{"elements", cfg.fem_elements}, {"max_rel_diff", worst}, {"pairs", pairs}};
            } catch (const Error& err) {
                fem = json{{"error", error_json(err)}};
            }
            e["fem_cross_check"] = fem;
            solved = true;
        } catch (const Error& err) {
            e["error"] = error_json(err);
            degrade(exit_code::numerical_failure, "solve_failed");
        }
        report["eigenvalues"] = e;
    } else {
        report["eigenvalues"] = skipped(model_ok ? "mode stops before solve" : "invalid coefficient model");
    }

    // ---- diagnose
    if (depth >= rank_of(Mode::diagnose) && solved) {
        json d;
        try {
            const auto seq = root_sequence(data, t);
            const GramAnalysis ga = gram_analysis(seq, t, cfg.kappa_n);
            json rows = json::array();
            std::ostringstream tsv;
            tsv << "n\tkappa\n";
            for (size_t k = 0; k < ga.n_list.size(); ++k) {
                rows.push_back(json{{"n", ga.n_list[k]},
                                    {"kappa", ga.kappa[k]},
                                    {"min_eig", ga.min_eig[k]},
                                    {"max_eig", ga.max_eig[k]}});
                tsv << ga.n_list[k] << "\t" << fmt(ga.kappa[k]) << "\n";
            }
            out.kappa_tsv = tsv.str();
            d["gram"] = json{{"sections", rows},
                             {"growth_ratio", ga.growth_ratio},
                             {"bounded", ga.bounded},
                             {"verdict", ga.verdict}};
            const OrthogonalityReport orep = orthogonality_report(data, t);
            d["orthogonality"] = json{{"max_offblock_pairing", orep.max_offblock_pairing},
                                      {"pairs_checked", orep.pairs_checked},
                                      {"nonreal_count", orep.nonreal_count},
                                      {"krein_signs", orep.krein_signs},
                                      {"positive", orep.positive},
                                      {"negative", orep.negative},
                                      {"neutral", orep.neutral}};
        } catch (const Error& err) {
            d["error"] = error_json(err);
            degrade(exit_code::numerical_failure, "diagnostics_failed");
        }
        report["diagnostics"] = d;
    } else {
        report["diagnostics"] = skipped(depth >= rank_of(Mode::diagnose) ? "no spectral data" : "mode stops before diagnose");
    }
    return finish();
}

void write_outputs(const PipelineOutput& out, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::ConfigError, "cannot write " + (fs::path(dir) / name).string());
        f << text;
    };
    put("report.json", out.report_json);
    if (!out.eigenvalues_csv.empty()) put("eigenvalues.csv", out.eigenvalues_csv);
    if (!out.kappa_tsv.empty()) put("kappa.tsv", out.kappa_tsv);
}

}  // namespace indefsl
