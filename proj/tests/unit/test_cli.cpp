#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "indefsl/config.hpp"
#include "indefsl/error.hpp"
#include "indefsl/pipeline.hpp"

using namespace indefsl;
using json = nlohmann::json;

namespace {

const char* kIndefinite = R"(# r = sgn(x)
[coefficients]
p.constant = 1
q.constant = 0
r.piece = interval=(-1,0) anchor=0 order=0 factor=poly:-1
r.piece = interval=(0,1) anchor=0 order=0 factor=poly:1

[bc]
L = 1 0 0 0
M = 0 0 0 1
N = 0 1 0 0

[solve]
count = 6
kappa_n = 2 4 6

[grid]
n = 128
spectral_panels = 24
fem_elements = 64
)";

ErrorKind error_kind(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::RankDeficient;  // sentinel: no error
}

std::string message_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

std::string with_bc(const std::string& L, const std::string& M, const std::string& N)
{
    std::string s = kIndefinite;
    const auto a = s.find("L = "), b = s.find("[solve]");
    return s.substr(0, a) + "L = " + L + "\nM = " + M + "\nN = " + N + "\n\n" + s.substr(b);
}

}  // namespace

TEST_CASE("config round trip")
{
    const ProblemConfig a = parse_config(kIndefinite);
    CHECK(a.count == 6);
    CHECK(a.grid_n == 128);
    CHECK(a.r.size() == 2);
    CHECK(a.kappa_n == std::vector<int>{2, 4, 6});
    CHECK(a.validation == Validation::exact);
    CHECK_FALSE(a.region.has_value());
    const std::string text = emit_config(a);
    const ProblemConfig b = parse_config(text);
    CHECK(a == b);
    CHECK(emit_config(b) == text);

    ProblemConfig c = a;
    c.region = Rect{-1.5, 2.25, -0.125, 0.1};
    c.cluster_rel = 1.0 / 3.0;
    c.seed = 18446744073709551615ull;
    c.r[1].poly = {0.1, -2.0, 1e-7};
    CHECK(parse_config(emit_config(c)) == c);
}

TEST_CASE("config errors name the line")
{
    CHECK(error_kind("[nowhere]\n") == ErrorKind::ConfigError);
    CHECK(message_of(std::string(kIndefinite) + "bogus = 1\n").find("line 21") != std::string::npos);
    CHECK(error_kind(with_bc("1 0 0", "0 0 0 1", "0 1 0 0")) == ErrorKind::ConfigError);
    CHECK(error_kind(with_bc("1 0 0 x", "0 0 0 1", "0 1 0 0")) == ErrorKind::ConfigError);
    CHECK(error_kind("[coefficients]\np.piece = interval=(-1,1) anchor=0 order=0 factor=cos\n") ==
          ErrorKind::ConfigError);
    CHECK(error_kind("[bc]\nL = 1 0 0 0\n") == ErrorKind::ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/indefsl.conf"), Error);
}

TEST_CASE("modes")
{
    CHECK(parse_mode("verify-w") == Mode::verify_w);
    CHECK(parse_mode("all") == Mode::all);
    CHECK_FALSE(parse_mode("solve-all").has_value());
    for (Mode m : {Mode::check_bc, Mode::classify, Mode::verify_w, Mode::solve, Mode::diagnose, Mode::all})
        CHECK(parse_mode(to_string(m)) == m);
}

TEST_CASE("check-bc marks later blocks skipped")
{
    const PipelineOutput out = run_pipeline(parse_config(kIndefinite), Mode::check_bc);
    CHECK(out.exit_code == exit_code::ok);
    const json r = json::parse(out.report_json);
    CHECK(r["validation"]["valid"] == true);
    CHECK(r["validation"]["delta"] == 1.0);
    CHECK(r["split"]["form_domain_case"] == "FD4");
    for (const char* k : {"classification", "conditions", "w_verification", "eigenvalues", "diagnostics"})
        CHECK(r[k]["skipped"] == true);
    CHECK(out.eigenvalues_csv.empty());
}

TEST_CASE("failing Q-form exits 2 with residuals")
{
    const PipelineOutput out = run_pipeline(parse_config(with_bc("1 0 i 0", "0 0 0 1", "0 1 0 0")), Mode::all);
    CHECK(out.exit_code == exit_code::validation_failure);
    const json r = json::parse(out.report_json);
    CHECK(r["status"] == "validation_failure");
    CHECK(r["validation"]["valid"] == false);
    CHECK(r["validation"]["error"]["kind"] == "QFormViolation");
    CHECK(r["validation"]["error"]["identity"] == "LQL*");
    CHECK(r["validation"]["residuals"]["LQL"].get<double>() > 0.5);
    CHECK(r["eigenvalues"]["skipped"] == true);
}

TEST_CASE("separated rows with the eigenparameter at f(1) need only the condition at 0")
{
    const PipelineOutput out = run_pipeline(load_config(INDEFSL_CONFIG_DIR "/separated_eigen_right.conf"), Mode::classify);
    CHECK(out.exit_code == exit_code::ok);
    const json r = json::parse(out.report_json);
    CHECK(r["classification"]["theorem"] == "Thm6_1");
    CHECK(r["classification"]["case"] == "(b-i)+(c-iii)");
    CHECK(r["classification"]["required_conditions"] == json::array({"At0"}));
    CHECK(r["validation"]["delta"].get<double>() > 0.0);
    CHECK(r["split"]["form_domain_case"] == "FD3");
}

TEST_CASE("full pipeline on a small indefinite problem")
{
    ProblemConfig cfg = parse_config(kIndefinite);
    const PipelineOutput a = run_pipeline(cfg, Mode::all);
    CHECK(a.exit_code == exit_code::ok);
    const json r = json::parse(a.report_json);
    CHECK(r["w_verification"]["passed"] == true);
    CHECK(r["conditions"]["0"]["holds"] == true);
    CHECK(r["eigenvalues"]["count"] == 6);
    // Sections this short say nothing about boundedness; only sanity is checked here.
    for (const auto& sec : r["diagnostics"]["gram"]["sections"]) CHECK(sec["kappa"].get<double>() < 100.0);
    CHECK(r["diagnostics"]["gram"]["sections"].size() == 3);
    CHECK(r["diagnostics"]["orthogonality"]["max_offblock_pairing"].get<double>() < 1e-6);

    std::istringstream csv(a.eigenvalues_csv);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "re_lambda,im_lambda,alg_mult,geo_mult,krein_sign");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 6);
    CHECK(a.kappa_tsv.rfind("n\tkappa\n2\t", 0) == 0);

    // Byte-stable, and the seed moves only the verification samples.
    CHECK(run_pipeline(cfg, Mode::all).report_json == a.report_json);
    cfg.seed = 99;
    const PipelineOutput b = run_pipeline(cfg, Mode::all);
    CHECK(b.eigenvalues_csv == a.eigenvalues_csv);
    CHECK(b.kappa_tsv == a.kappa_tsv);
    CHECK(json::parse(b.report_json)["classification"] == r["classification"]);
}

TEST_CASE("definite weight skips the W blocks")
{
    const PipelineOutput out = run_pipeline(load_config(INDEFSL_CONFIG_DIR "/definite_oracle.conf"), Mode::verify_w);
    CHECK(out.exit_code == exit_code::ok);
    const json r = json::parse(out.report_json);
    CHECK(r["conditions"]["skipped"] == true);
    CHECK(r["w_verification"]["skipped"] == true);
}

TEST_CASE("outputs are written as files")
{
    const auto dir = std::filesystem::temp_directory_path() / "indefsl_unit_cli";
    std::filesystem::remove_all(dir);
    PipelineOutput out;
    out.report_json = "{}\n";
    out.eigenvalues_csv = "re_lambda,im_lambda,alg_mult,geo_mult,krein_sign\n";
    write_outputs(out, dir.string());
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "eigenvalues.csv"));
    CHECK_FALSE(std::filesystem::exists(dir / "kappa.tsv"));
    std::filesystem::remove_all(dir);
}
