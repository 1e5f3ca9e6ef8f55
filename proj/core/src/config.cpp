#include "indefsl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "indefsl/error.hpp"

namespace indefsl {

namespace {

[[noreturn]] void fail(int line, const std::string& what)
{
    throw Error(ErrorKind::ConfigError, "line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> words(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

double to_double(const std::string& text, int line)
{
    const std::string s = trim(text);
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (!s.empty() && *b == '+') ++b;
    const auto res = std::from_chars(b, e, v);
    if (s.empty() || res.ec != std::errc() || res.ptr != e) fail(line, "not a number: '" + s + "'");
    return v;
}

long long to_int(const std::string& text, int line)
{
    const std::string s = trim(text);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) fail(line, "not an integer: '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& text, int line)
{
    const std::string s = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) fail(line, "not an unsigned integer: '" + s + "'");
    return v;
}

bool to_bool(const std::string& s, int line)
{
    if (s == "true") return true;
    if (s == "false") return false;
    fail(line, "expected true or false");
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

PieceSpec parse_piece(const std::string& value, int line)
{
    PieceSpec ps;
    bool have_interval = false;
    for (const auto& tok : words(value)) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) fail(line, "piece field without '=': " + tok);
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "interval") {
            if (val.size() < 5 || val.front() != '(' || val.back() != ')') fail(line, "interval must look like (a,b)");
            const auto parts = split(val.substr(1, val.size() - 2), ',');
            if (parts.size() != 2) fail(line, "interval must have two ends");
            ps.lo = to_double(parts[0], line);
            ps.hi = to_double(parts[1], line);
            have_interval = true;
        } else if (key == "anchor") {
            ps.anchor = to_double(val, line);
        } else if (key == "order") {
            ps.order = to_double(val, line);
        } else if (key == "factor") {
            if (val.rfind("poly:", 0) != 0) fail(line, "only poly:c0,c1,... factors are supported");
            ps.poly.clear();
            for (const auto& c : split(val.substr(5), ',')) ps.poly.push_back(to_double(c, line));
        } else {
            fail(line, "unknown piece field '" + key + "'");
        }
    }
    if (!have_interval) fail(line, "piece needs interval=(a,b)");
    if (!(ps.lo < ps.hi)) fail(line, "empty interval");
    return ps;
}

ExactRow parse_row(const std::string& value, int line)
{
    const auto w = words(value);
    if (w.size() != 4) fail(line, "boundary row needs four entries");
    ExactRow row;
    for (int k = 0; k < 4; ++k)
        if (!parse_gauss_rational(w[k], row[k])) fail(line, "malformed complex entry '" + w[k] + "'");
    return row;
}

bool same(const ExactRow& a, const ExactRow& b)
{
    for (int k = 0; k < 4; ++k)
        if (a[k].re != b[k].re || a[k].im != b[k].im) return false;
    return true;
}

CoefficientFunction build(const std::vector<PieceSpec>& specs)
{
    CoefficientFunction f;
    for (const auto& s : specs) {
        CoefficientPiece pc;
        pc.lo = s.lo;
        pc.hi = s.hi;
        pc.anchor = s.anchor;
        pc.order = s.order;
        pc.factor = SmoothFactor::polynomial(s.poly);
        f.pieces.push_back(pc);
    }
    std::sort(f.pieces.begin(), f.pieces.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    return f;
}

}  // namespace

CoefficientModel ProblemConfig::model() const
{
    CoefficientModel m;
    m.p = build(p);
    m.q = build(q);
    m.r = build(r);
    m.allow_p_order = allow_p_order;
    m.definite_weight = definite_weight;
    return m;
}

bool ProblemConfig::operator==(const ProblemConfig& o) const
{
    const bool regions_equal =
        region.has_value() == o.region.has_value() &&
        (!region || (region->re_lo == o.region->re_lo && region->re_hi == o.region->re_hi &&
                     region->im_lo == o.region->im_lo && region->im_hi == o.region->im_hi));
    return p == o.p && q == o.q && r == o.r && allow_p_order == o.allow_p_order &&
           definite_weight == o.definite_weight && same(L, o.L) && same(M, o.M) && same(N, o.N) &&
           validation == o.validation && count == o.count && regions_equal && max_eigs == o.max_eigs &&
           kappa_n == o.kappa_n && grid_n == o.grid_n && spectral_panels == o.spectral_panels &&
           fem_elements == o.fem_elements && bc_tol == o.bc_tol && integrator_tol == o.integrator_tol &&
           cluster_rel == o.cluster_rel && verify_samples == o.verify_samples && seed == o.seed &&
           out_dir == o.out_dir;
}

ProblemConfig parse_config(const std::string& text)
{
    ProblemConfig cfg;
    cfg.p.clear();
    cfg.q.clear();
    cfg.r.clear();
    bool have_L = false, have_M = false, have_N = false;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            static const char* known[] = {"coefficients", "bc", "solve", "grid", "tolerances", "verify", "output"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                fail(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        auto unknown = [&]() { fail(line, "unknown key '" + key + "' in [" + section + "]"); };

        if (section == "coefficients") {
            auto target = [&](char c) -> std::vector<PieceSpec>& { return c == 'p' ? cfg.p : c == 'q' ? cfg.q : cfg.r; };
            if ((key == "p.piece" || key == "q.piece" || key == "r.piece")) {
                target(key[0]).push_back(parse_piece(value, line));
            } else if (key == "p.constant" || key == "q.constant" || key == "r.constant") {
                PieceSpec ps;
                ps.poly = {to_double(value, line)};
                target(key[0]).push_back(ps);
            } else if (key == "allow_p_order") {
                cfg.allow_p_order = to_bool(value, line);
            } else if (key == "definite_weight") {
                cfg.definite_weight = to_bool(value, line);
            } else {
                unknown();
            }
        } else if (section == "bc") {
            if (key == "L") {
                cfg.L = parse_row(value, line);
                have_L = true;
            } else if (key == "M") {
                cfg.M = parse_row(value, line);
                have_M = true;
            } else if (key == "N") {
                cfg.N = parse_row(value, line);
                have_N = true;
            } else if (key == "validation") {
                if (value == "exact") cfg.validation = Validation::exact;
                else if (value == "float") cfg.validation = Validation::floating;
                else fail(line, "validation must be exact or float");
            } else {
                unknown();
            }
        } else if (section == "solve") {
            if (key == "count") {
                cfg.count = static_cast<int>(to_int(value, line));
            } else if (key == "region") {
                if (value == "auto") {
                    cfg.region.reset();
                } else {
                    const auto w = words(value);
                    if (w.size() != 4) fail(line, "region needs re_lo re_hi im_lo im_hi");
                    Rect rc{to_double(w[0], line), to_double(w[1], line), to_double(w[2], line), to_double(w[3], line)};
                    if (!(rc.re_lo < rc.re_hi && rc.im_lo < rc.im_hi)) fail(line, "region is empty");
                    cfg.region = rc;
                }
            } else if (key == "max_eigs") {
                cfg.max_eigs = static_cast<int>(to_int(value, line));
            } else if (key == "kappa_n") {
                cfg.kappa_n.clear();
                for (const auto& w : words(value)) cfg.kappa_n.push_back(static_cast<int>(to_int(w, line)));
            } else {
                unknown();
            }
        } else if (section == "grid") {
            if (key == "n") cfg.grid_n = static_cast<int>(to_int(value, line));
            else if (key == "spectral_panels") cfg.spectral_panels = static_cast<int>(to_int(value, line));
            else if (key == "fem_elements") cfg.fem_elements = static_cast<int>(to_int(value, line));
            else unknown();
        } else if (section == "tolerances") {
            if (key == "bc") cfg.bc_tol = to_double(value, line);
            else if (key == "integrator") cfg.integrator_tol = to_double(value, line);
            else if (key == "cluster_rel") cfg.cluster_rel = to_double(value, line);
            else unknown();
        } else if (section == "verify") {
            if (key == "samples") cfg.verify_samples = static_cast<int>(to_int(value, line));
            else if (key == "seed") cfg.seed = to_u64(value, line);
            else unknown();
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = value;
            else unknown();
        } else {
            fail(line, "key outside of any section");
        }
    }
    if (cfg.p.empty() || cfg.q.empty() || cfg.r.empty()) fail(line, "p, q and r all need at least one piece");
    if (!have_L || !have_M || !have_N) fail(line, "[bc] needs L, M and N");
    if (cfg.count < 1 || cfg.max_eigs < 1) fail(line, "count and max_eigs must be positive");
    return cfg;
}

ProblemConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const ProblemConfig& cfg)
{
    std::ostringstream os;
    auto pieces = [&](char name, const std::vector<PieceSpec>& v) {
        for (const auto& ps : v) {
            os << name << ".piece = interval=(" << fmt(ps.lo) << "," << fmt(ps.hi) << ") anchor=" << fmt(ps.anchor)
               << " order=" << fmt(ps.order) << " factor=poly:";
            for (size_t k = 0; k < ps.poly.size(); ++k) os << (k ? "," : "") << fmt(ps.poly[k]);
            os << "\n";
        }
    };
    auto row = [&](const char* name, const ExactRow& r) {
        os << name << " =";
        for (const auto& e : r) os << " " << to_string(e);
        os << "\n";
    };
    os << "[coefficients]\n";
    pieces('p', cfg.p);
    pieces('q', cfg.q);
    pieces('r', cfg.r);
    os << "allow_p_order = " << (cfg.allow_p_order ? "true" : "false") << "\n";
    os << "definite_weight = " << (cfg.definite_weight ? "true" : "false") << "\n\n[bc]\n";
    row("L", cfg.L);
    row("M", cfg.M);
    row("N", cfg.N);
    os << "validation = " << (cfg.validation == Validation::exact ? "exact" : "float") << "\n\n[solve]\n";
    os << "count = " << cfg.count << "\n";
    if (cfg.region)
        os << "region = " << fmt(cfg.region->re_lo) << " " << fmt(cfg.region->re_hi) << " " << fmt(cfg.region->im_lo)
           << " " << fmt(cfg.region->im_hi) << "\n";
    else
        os << "region = auto\n";
    os << "max_eigs = " << cfg.max_eigs << "\nkappa_n =";
    for (int n : cfg.kappa_n) os << " " << n;
    os << "\n\n[grid]\nn = " << cfg.grid_n << "\nspectral_panels = " << cfg.spectral_panels
       << "\nfem_elements = " << cfg.fem_elements << "\n\n[tolerances]\nbc = " << fmt(cfg.bc_tol)
       << "\nintegrator = " << fmt(cfg.integrator_tol) << "\ncluster_rel = " << fmt(cfg.cluster_rel)
       << "\n\n[verify]\nsamples = " << cfg.verify_samples << "\nseed = " << cfg.seed << "\n\n[output]\ndir = "
       << cfg.out_dir << "\n";
    return os.str();
}

}  // namespace indefsl
