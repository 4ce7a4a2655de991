#include "cforge/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

Expression expr(const YAML::Node& n, const std::string& key, const std::string& fallback = "0") {
    if (!n || !n[key]) return Expression::parse(fallback);
    return Expression::parse(n[key].as<std::string>());
}

std::array<Expression, 3> vector_expr(const YAML::Node& n, const std::string& key) {
    std::array<Expression, 3> v{};
    if (!n || !n[key]) return v;
    const YAML::Node s = n[key];
    if (!s.IsSequence() || s.size() > 3) throw ConfigError("'" + key + "' must be a list of up to 3 expressions");
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = Expression::parse(s[i].as<std::string>());
    return v;
}

/// Symmetric tensor from a map with keys xx, xy, xz, yy, yz, zz.
std::array<Expression, 6> sym_expr(const YAML::Node& n, const std::string& key) {
    static const char* names[6] = {"xx", "xy", "xz", "yy", "yz", "zz"};
    std::array<Expression, 6> v{};
    if (!n || !n[key]) return v;
    const YAML::Node m = n[key];
    if (!m.IsMap()) throw ConfigError("'" + key + "' must map xx..zz to expressions");
    for (auto it = m.begin(); it != m.end(); ++it) {
        const std::string k = it->first.as<std::string>();
        bool found = false;
        for (std::size_t i = 0; i < 6; ++i)
            if (k == names[i]) {
                v[i] = Expression::parse(it->second.as<std::string>());
                found = true;
            }
        if (!found) throw ConfigError("unknown tensor component '" + k + "' in '" + key + "'");
    }
    return v;
}

template <class T>
T get(const YAML::Node& n, const std::string& key, T fallback) {
    return n && n[key] ? n[key].as<T>() : fallback;
}

BoundaryKind boundary_kind(const std::string& s) {
    if (s == "periodic") return BoundaryKind::periodic;
    if (s == "dirichlet") return BoundaryKind::dirichlet;
    throw ConfigError("unknown boundary kind '" + s + "'");
}

void check_tol(double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string("tolerance ") + name + " must lie in (0, 1)");
}

RunConfig parse_node(const YAML::Node& root) {
    RunConfig c;
    const YAML::Node ch = root["chart"];
    if (!ch) throw ConfigError("missing 'chart' section");
    c.chart.dim = get(ch, "dim", 3);
    c.chart.extents = get(ch, "extents", std::vector<double>{});
    c.chart.nodes = get(ch, "nodes", std::vector<int>{});
    c.chart.origin = get(ch, "origin", std::vector<double>{});
    if (ch["boundary"] && ch["boundary"].IsScalar()) {
        c.chart.boundary.assign(static_cast<std::size_t>(c.chart.dim), boundary_kind(ch["boundary"].as<std::string>()));
    } else {
        for (const std::string& s : get(ch, "boundary", std::vector<std::string>{}))
            c.chart.boundary.push_back(boundary_kind(s));
    }

    const YAML::Node m = root["metric"];
    const std::string gen = get<std::string>(m, "generator", "flat");
    if (gen == "flat") {
        c.metric.kind = MetricGenerator::flat;
    } else if (gen == "conformally_flat") {
        c.metric.kind = MetricGenerator::conformally_flat;
        c.metric.psi = expr(m, "psi", "1");
    } else if (gen == "custom") {
        c.metric.kind = MetricGenerator::custom;
        c.metric.components = sym_expr(m, "components");
    } else {
        throw ConfigError("unknown metric generator '" + gen + "'");
    }
    c.n = get(root["conformal"], "n", c.chart.dim >= 3 ? c.chart.dim : 3);
    if (c.n < 3) throw ConfigError("conformal dimension n must be at least 3");
    c.metric.conformal_n = c.n;

    const YAML::Node d = root["data"];
    c.data.tau = expr(d, "tau");
    c.data.U = sym_expr(d, "U");
    c.data.eps1 = expr(d, "eps1");
    c.data.eps2 = expr(d, "eps2");
    c.data.eps3 = expr(d, "eps3");
    c.data.omega1 = vector_expr(d, "omega1");
    c.data.omega2 = vector_expr(d, "omega2");
    c.data.tt_tol = get(d, "tt_tol", 1e-8);
    c.data.trace_cap = get(d, "trace_cap", 1.0);
    if (d && d["em"]) {
        const YAML::Node em = d["em"];
        c.data.has_em = true;
        static const char* names[3] = {"xy", "xz", "yz"};
        if (em["F"]) {
            if (!em["F"].IsMap()) throw ConfigError("'em.F' must map xy, xz, yz to expressions");
            for (auto it = em["F"].begin(); it != em["F"].end(); ++it) {
                const std::string k = it->first.as<std::string>();
                bool found = false;
                for (std::size_t i = 0; i < 3; ++i)
                    if (k == names[i]) {
                        c.data.F[i] = Expression::parse(it->second.as<std::string>());
                        found = true;
                    }
                if (!found) throw ConfigError("unknown em.F component '" + k + "'");
            }
        }
        c.data.q = expr(em, "q");
        c.data.V = vector_expr(em, "V");
    }
    if (d && d["bc"]) {
        const YAML::Node bc = d["bc"];
        if (bc["u"]) c.data.bc_u = Expression::parse(bc["u"].as<std::string>());
        c.data.bc_v = vector_expr(bc, "v");
        c.data.bc_w = expr(bc, "w");
    }

    const YAML::Node s = root["solver"];
    c.solver.linear_tol = get(s, "linear_tol", c.solver.linear_tol);
    c.solver.picard_tol = get(s, "picard_tol", c.solver.picard_tol);
    c.solver.outer_tol = get(s, "outer_tol", c.solver.outer_tol);
    c.solver.eigen_tol = get(s, "eigen_tol", c.solver.eigen_tol);
    c.solver.max_iter = get(s, "max_iter", c.solver.max_iter);
    c.solver.max_outer = get(s, "max_outer", c.solver.max_outer);
    c.solver.newton = get(s, "newton", c.solver.newton);
    c.solver.mp_slack = get(s, "mp_slack", c.solver.mp_slack);
    check_tol(c.solver.linear_tol, "linear_tol");
    check_tol(c.solver.picard_tol, "picard_tol");
    check_tol(c.solver.outer_tol, "outer_tol");
    check_tol(c.solver.eigen_tol, "eigen_tol");
    check_tol(c.solver.mp_slack, "mp_slack");
    if (c.solver.max_iter < 1 || c.solver.max_outer < 0) throw ConfigError("iteration limits must be positive");

    const YAML::Node b = root["barriers"];
    const std::string route = get<std::string>(b, "route", "auto");
    if (route == "auto") c.barriers.route = RouteChoice::automatic;
    else if (route == "linear_nonvacuum") c.barriers.route = RouteChoice::linear_nonvacuum;
    else if (route == "yamabe") c.barriers.route = RouteChoice::yamabe;
    else throw ConfigError("unknown barrier route '" + route + "'");
    c.barriers.c_plus = get(b, "c_plus", c.barriers.c_plus);
    c.barriers.c_minus = get(b, "c_minus", c.barriers.c_minus);
    const std::string ych = get<std::string>(b, "yamabe_choice", "R_tau");
    if (ych == "R_tau") c.barriers.yamabe = YamabeChoice::R_tau;
    else if (ych == "eps3_tau") c.barriers.yamabe = YamabeChoice::eps3_tau;
    else throw ConfigError("unknown yamabe choice '" + ych + "'");
    c.barriers.yamabe_u0 = get(b, "yamabe_u0", c.barriers.yamabe_u0);
    const std::string cert = get<std::string>(b, "certify", "posteriori");
    if (cert == "none") c.barriers.certify = CertifyMode::none;
    else if (cert == "worst_case") c.barriers.certify = CertifyMode::worst_case;
    else if (cert == "posteriori") c.barriers.certify = CertifyMode::posteriori;
    else throw ConfigError("unknown certification mode '" + cert + "'");
    c.barriers.c_cert = get(b, "c_cert", c.barriers.c_cert);
    c.barriers.lp = get(b, "lp", c.barriers.lp);

    const YAML::Node ex = root["exhaustion"];
    c.exhaustion_levels = get(ex, "levels", 1);
    c.exhaustion_shrink = get(ex, "shrink", 0.0);

    if (const YAML::Node mm = root["mms"]) {
        c.mms.enabled = true;
        c.mms.targets.phi = expr(mm, "phi", "1");
        c.mms.targets.X = vector_expr(mm, "X");
        if (mm["f"]) c.mms.targets.f = Expression::parse(mm["f"].as<std::string>());
        c.mms.resolutions = get(mm, "resolutions", std::vector<int>{});
    }
    if (const YAML::Node sw = root["sweep"]) {
        c.sweep.lo = get(sw, "lo", c.sweep.lo);
        c.sweep.hi = get(sw, "hi", c.sweep.hi);
        c.sweep.steps = get(sw, "steps", c.sweep.steps);
        c.sweep.c_target = get(sw, "c_target", c.sweep.c_target);
    }
    c.output_dir = get<std::string>(root["output"], "dir", c.output_dir);
    c.seed = get<std::uint64_t>(root, "seed", 0);
    return c;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    try {
        c = parse_node(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.hash = sha256_hex(text);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace cforge
