#include "phaseloop/scenario.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "phaseloop/grid_potential.hpp"
#include "phaseloop/version.hpp"

namespace phaseloop {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) fail(where + "/" + it.key(), "unknown key");
    }
}

double num(const json& obj, const std::string& where, const char* key,
           std::optional<double> def = std::nullopt) {
    if (!obj.contains(key)) {
        if (def) return *def;
        fail(where, std::string("missing key '") + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) fail(where + "/" + key, "expected a number");
    return v.get<double>();
}

int integer(const json& obj, const std::string& where, const char* key, int def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(where + "/" + key, "expected an integer");
    return v.get<int>();
}

bool boolean(const json& obj, const std::string& where, const char* key, bool def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(where + "/" + key, "expected a boolean");
    return v.get<bool>();
}

std::string str(const json& obj, const std::string& where, const char* key,
                std::optional<std::string> def = std::nullopt) {
    if (!obj.contains(key)) {
        if (def) return *def;
        fail(where, std::string("missing key '") + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_string()) fail(where + "/" + key, "expected a string");
    return v.get<std::string>();
}

Vec3 vec3(const json& obj, const std::string& where, const char* key,
          std::optional<Vec3> def = std::nullopt) {
    if (!obj.contains(key)) {
        if (def) return *def;
        fail(where, std::string("missing key '") + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 3) fail(where + "/" + key, "expected [x, y, z]");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
        if (!v[i].is_number()) fail(where + "/" + key, "expected numbers");
        out[i] = v[i].get<double>();
    }
    return out;
}

Mat3 mat3(const json& obj, const std::string& where, const char* key,
          std::optional<Mat3> def = std::nullopt) {
    if (!obj.contains(key)) {
        if (def) return *def;
        fail(where, std::string("missing key '") + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 3) fail(where + "/" + key, "expected a 3x3 array");
    Mat3 out;
    for (int i = 0; i < 3; ++i) {
        if (!v[i].is_array() || v[i].size() != 3) fail(where + "/" + key, "expected a 3x3 array");
        for (int j = 0; j < 3; ++j) out(i, j) = v[i][j].get<double>();
    }
    return out;
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json mat3_json(const Mat3& m) {
    json out = json::array();
    for (int i = 0; i < 3; ++i) out.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
    return out;
}

// A potential scaled by a constant factor (used for sweepable strengths).
class ScaledPotential final : public Potential {
  public:
    ScaledPotential(std::shared_ptr<Potential> inner, double scale)
        : inner_(std::move(inner)), scale_(scale) {
        set_fd_step(inner_->fd_step());
    }
    double value(const Vec3& r, double t, Branch b) const override {
        return scale_ * inner_->value(r, t, b);
    }
    Vec3 gradient(const Vec3& r, double t, Branch b) const override {
        return scale_ * inner_->gradient(r, t, b);
    }
    Mat3 hessian(const Vec3& r, double t, Branch b) const override {
        return scale_ * inner_->hessian(r, t, b);
    }
    Tensor3 third(const Vec3& r, double t, Branch b) const override {
        return scale_ * inner_->third(r, t, b);
    }
    Tensor4 fourth(const Vec3& r, double t, Branch b) const override {
        return scale_ * inner_->fourth(r, t, b);
    }
    bool branch_dependent() const override { return inner_->branch_dependent(); }
    bool time_independent() const override { return inner_->time_independent(); }

  private:
    std::shared_ptr<Potential> inner_;
    double scale_;
};

// V identically zero.
class NullPotential final : public Potential {
  public:
    double value(const Vec3&, double, Branch) const override { return 0.0; }
    Vec3 gradient(const Vec3&, double, Branch) const override { return Vec3::Zero(); }
    Mat3 hessian(const Vec3&, double, Branch) const override { return Mat3::Zero(); }
    Tensor3 third(const Vec3&, double, Branch) const override { return Tensor3::zero(); }
    Tensor4 fourth(const Vec3&, double, Branch) const override { return Tensor4::zero(); }
    bool time_independent() const override { return true; }
};

Tensor3 tensor3_from(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 27) fail(where, "expected 27 numbers (i-major flat order)");
    Tensor3 t;
    for (int a = 0; a < 27; ++a) t.v[a] = v[a].get<double>();
    return t;
}

Tensor4 tensor4_from(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 81) fail(where, "expected 81 numbers (i-major flat order)");
    Tensor4 t;
    for (int a = 0; a < 81; ++a) t.v[a] = v[a].get<double>();
    return t;
}

json tensor3_json(const Tensor3& t) {
    json out = json::array();
    for (double x : t.v) out.push_back(x);
    return out;
}

json tensor4_json(const Tensor4& t) {
    json out = json::array();
    for (double x : t.v) out.push_back(x);
    return out;
}

PolynomialCoeffs poly_coeffs(const json& p, const std::string& where) {
    PolynomialCoeffs c;
    c.constant = num(p, where, "constant_J", 0.0);
    c.linear = vec3(p, where, "linear_J_per_m", Vec3(Vec3::Zero()));
    c.quadratic = mat3(p, where, "quadratic_J_per_m2", Mat3(Mat3::Zero()));
    if (p.contains("cubic_J_per_m3")) c.cubic = tensor3_from(p.at("cubic_J_per_m3"), where);
    if (p.contains("quartic_J_per_m4")) c.quartic = tensor4_from(p.at("quartic_J_per_m4"), where);
    return c;
}

json poly_coeffs_json(const PolynomialCoeffs& c) {
    json out;
    out["constant_J"] = c.constant;
    out["linear_J_per_m"] = vec3_json(c.linear);
    out["quadratic_J_per_m2"] = mat3_json(c.quadratic);
    out["cubic_J_per_m3"] = tensor3_json(c.cubic);
    out["quartic_J_per_m4"] = tensor4_json(c.quartic);
    return out;
}

}  // namespace

Scenario build_scenario(const json& config) {
    check_keys(config, "", {"geometry", "constants", "potential", "state", "engine", "validity",
                            "oracles", "output"});
    Scenario sc;
    json canon;

    // ---- constants ----
    if (!config.contains("constants")) fail("", "missing 'constants'");
    const json& cst = config.at("constants");
    check_keys(cst, "/constants", {"mass_kg", "hbar_Js"});
    const double mass = num(cst, "/constants", "mass_kg");
    const double hbar = num(cst, "/constants", "hbar_Js", constants::hbar_si);
    canon["constants"] = {{"mass_kg", mass}, {"hbar_Js", hbar}};

    // ---- geometry ----
    if (!config.contains("geometry")) fail("", "missing 'geometry'");
    const json& geo = config.at("geometry");
    const std::string gtype = str(geo, "/geometry", "type");
    json gcanon;
    gcanon["type"] = gtype;
    if (gtype == "mach_zehnder") {
        check_keys(geo, "/geometry",
                   {"type", "T_s", "k_rad_per_m", "g_m_per_s2", "laser_phases_rad", "z_initial_m",
                    "v_initial_m_per_s", "t_detect_s"});
        MachZehnderParams p;
        p.T = num(geo, "/geometry", "T_s");
        p.k = num(geo, "/geometry", "k_rad_per_m");
        p.g = num(geo, "/geometry", "g_m_per_s2", 0.0);
        p.mass = mass;
        p.hbar = hbar;
        p.z_initial = num(geo, "/geometry", "z_initial_m", 0.0);
        p.v_initial = num(geo, "/geometry", "v_initial_m_per_s", 0.0);
        if (geo.contains("laser_phases_rad")) {
            const json& ph = geo.at("laser_phases_rad");
            if (!ph.is_array() || ph.size() != 3)
                fail("/geometry/laser_phases_rad", "expected 3 numbers");
            for (int i = 0; i < 3; ++i) p.laser_phases[i] = ph[i].get<double>();
        }
        if (geo.contains("t_detect_s")) p.t_detect = num(geo, "/geometry", "t_detect_s");
        sc.seq = mach_zehnder(p);
        gcanon["T_s"] = p.T;
        gcanon["k_rad_per_m"] = p.k;
        gcanon["g_m_per_s2"] = p.g;
        gcanon["laser_phases_rad"] = json::array({p.laser_phases[0], p.laser_phases[1],
                                                  p.laser_phases[2]});
        gcanon["z_initial_m"] = p.z_initial;
        gcanon["v_initial_m_per_s"] = p.v_initial;
        gcanon["t_detect_s"] = sc.seq.t_detect;
    } else if (gtype == "pulses") {
        check_keys(geo, "/geometry",
                   {"type", "t_initial_s", "t_detect_s", "gravity_m_per_s2", "r_initial_m",
                    "v_initial_m_per_s", "pulses"});
        sc.seq.t_initial = num(geo, "/geometry", "t_initial_s", 0.0);
        sc.seq.t_detect = num(geo, "/geometry", "t_detect_s");
        sc.seq.gravity = vec3(geo, "/geometry", "gravity_m_per_s2", Vec3(Vec3::Zero()));
        sc.seq.r_mean0 = vec3(geo, "/geometry", "r_initial_m", Vec3(Vec3::Zero()));
        sc.seq.v_mean0 = vec3(geo, "/geometry", "v_initial_m_per_s", Vec3(Vec3::Zero()));
        sc.seq.mass = mass;
        sc.seq.hbar = hbar;
        if (!geo.contains("pulses") || !geo.at("pulses").is_array())
            fail("/geometry", "missing 'pulses' array");
        json pcanon = json::array();
        int idx = 0;
        for (const json& pj : geo.at("pulses")) {
            const std::string where = "/geometry/pulses/" + std::to_string(idx++);
            check_keys(pj, where,
                       {"t_s", "k_upper_rad_per_m", "k_lower_rad_per_m", "phi_upper_rad",
                        "phi_lower_rad"});
            Pulse p;
            p.time = num(pj, where, "t_s");
            p.k_upper = vec3(pj, where, "k_upper_rad_per_m", Vec3(Vec3::Zero()));
            p.k_lower = vec3(pj, where, "k_lower_rad_per_m", Vec3(Vec3::Zero()));
            p.phi_upper = num(pj, where, "phi_upper_rad", 0.0);
            p.phi_lower = num(pj, where, "phi_lower_rad", 0.0);
            sc.seq.pulses.push_back(p);
            pcanon.push_back({{"t_s", p.time},
                              {"k_upper_rad_per_m", vec3_json(p.k_upper)},
                              {"k_lower_rad_per_m", vec3_json(p.k_lower)},
                              {"phi_upper_rad", p.phi_upper},
                              {"phi_lower_rad", p.phi_lower}});
        }
        sc.seq.validate();
        gcanon["t_initial_s"] = sc.seq.t_initial;
        gcanon["t_detect_s"] = sc.seq.t_detect;
        gcanon["gravity_m_per_s2"] = vec3_json(sc.seq.gravity);
        gcanon["r_initial_m"] = vec3_json(sc.seq.r_mean0);
        gcanon["v_initial_m_per_s"] = vec3_json(sc.seq.v_mean0);
        gcanon["pulses"] = pcanon;
    } else {
        fail("/geometry/type", "expected 'mach_zehnder' or 'pulses'");
    }
    canon["geometry"] = gcanon;

    // ---- potential ----
    json vcanon;
    std::shared_ptr<Potential> base;
    double scale = 1.0;
    if (config.contains("potential")) {
        const json& pj = config.at("potential");
        const std::string ptype = str(pj, "/potential", "type");
        vcanon["type"] = ptype;
        if (ptype == "none") {
            check_keys(pj, "/potential", {"type"});
            base = std::make_shared<NullPotential>();
        } else if (ptype == "polynomial") {
            check_keys(pj, "/potential",
                       {"type", "scale", "constant_J", "linear_J_per_m", "quadratic_J_per_m2",
                        "cubic_J_per_m3", "quartic_J_per_m4", "lower"});
            scale = num(pj, "/potential", "scale", 1.0);
            PolynomialCoeffs up = poly_coeffs(pj, "/potential");
            if (pj.contains("lower")) {
                const json& lj = pj.at("lower");
                check_keys(lj, "/potential/lower",
                           {"constant_J", "linear_J_per_m", "quadratic_J_per_m2",
                            "cubic_J_per_m3", "quartic_J_per_m4"});
                PolynomialCoeffs lo = poly_coeffs(lj, "/potential/lower");
                base = std::make_shared<PolynomialPotential>(up, lo);
                vcanon.update(poly_coeffs_json(up));
                vcanon["lower"] = poly_coeffs_json(lo);
            } else {
                base = std::make_shared<PolynomialPotential>(up);
                vcanon.update(poly_coeffs_json(up));
            }
            vcanon["scale"] = scale;
        } else if (ptype == "earth_taylor") {
            check_keys(pj, "/potential",
                       {"type", "scale", "g_m_per_s2", "R_m", "order", "include_linear"});
            scale = num(pj, "/potential", "scale", 1.0);
            const double g = num(pj, "/potential", "g_m_per_s2");
            const double R = num(pj, "/potential", "R_m");
            const int order = integer(pj, "/potential", "order", 3);
            const bool lin = boolean(pj, "/potential", "include_linear", false);
            base = earth_taylor(g, R, order, mass, lin).potential;
            vcanon["g_m_per_s2"] = g;
            vcanon["R_m"] = R;
            vcanon["order"] = order;
            vcanon["include_linear"] = lin;
            vcanon["scale"] = scale;
        } else if (ptype == "grid") {
            check_keys(pj, "/potential", {"type", "scale", "path", "fd_step_m"});
            scale = num(pj, "/potential", "scale", 1.0);
            const std::string path = str(pj, "/potential", "path");
            auto gp = std::make_shared<GridPotential>(read_grid_file(path));
            if (pj.contains("fd_step_m")) gp->set_fd_step(num(pj, "/potential", "fd_step_m"));
            vcanon["path"] = path;
            vcanon["fd_step_m"] = gp->fd_step();
            vcanon["scale"] = scale;
            base = gp;
        } else {
            fail("/potential/type", "expected one of none|polynomial|earth_taylor|grid");
        }
    } else {
        vcanon["type"] = "none";
        base = std::make_shared<NullPotential>();
    }
    sc.potential = scale == 1.0 ? base : std::make_shared<ScaledPotential>(base, scale);
    canon["potential"] = vcanon;

    // ---- state ----
    if (!config.contains("state")) fail("", "missing 'state'");
    const json& st = config.at("state");
    const std::string stype = str(st, "/state", "type");
    json scanon;
    scanon["type"] = stype;
    if (stype == "trap_ground") {
        check_keys(st, "/state", {"type", "omega_rad_per_s"});
        const Vec3 omega = vec3(st, "/state", "omega_rad_per_s");
        sc.state = trap_ground_state(omega, mass, hbar);
        scanon["omega_rad_per_s"] = vec3_json(omega);
    } else if (stype == "gaussian") {
        check_keys(st, "/state",
                   {"type", "sigma_rr_m2", "sigma_rp_kg_m2_per_s", "sigma_pp_kg2_m2_per_s2"});
        sc.state.mass = mass;
        sc.state.hbar = hbar;
        sc.state.sigma_rr = mat3(st, "/state", "sigma_rr_m2");
        sc.state.sigma_rp = mat3(st, "/state", "sigma_rp_kg_m2_per_s", Mat3(Mat3::Zero()));
        sc.state.sigma_pp = mat3(st, "/state", "sigma_pp_kg2_m2_per_s2");
        scanon["sigma_rr_m2"] = mat3_json(sc.state.sigma_rr);
        scanon["sigma_rp_kg_m2_per_s"] = mat3_json(sc.state.sigma_rp);
        scanon["sigma_pp_kg2_m2_per_s2"] = mat3_json(sc.state.sigma_pp);
    } else {
        fail("/state/type", "expected 'trap_ground' or 'gaussian'");
    }
    sc.state.mean_r = sc.seq.r_mean0;
    sc.state.mean_p = sc.seq.mass * sc.seq.v_mean0;
    sc.state.validate();
    canon["state"] = scanon;

    // ---- engine ----
    json ecanon;
    {
        json ej = config.contains("engine") ? config.at("engine") : json::object();
        check_keys(ej, "/engine",
                   {"orders", "quad_nodes", "nested_nodes", "validity_action", "warn_threshold",
                    "refuse_threshold", "probe_samples"});
        sc.engine.max_order = integer(ej, "/engine", "orders", 2);
        sc.engine.quad.nodes = integer(ej, "/engine", "quad_nodes", 32);
        sc.engine.nested.nodes = integer(ej, "/engine", "nested_nodes", 32);
        const std::string act = str(ej, "/engine", "validity_action", std::string("refuse"));
        if (act == "refuse") sc.engine.validity_action = ValidityAction::Refuse;
        else if (act == "warn") sc.engine.validity_action = ValidityAction::WarnOnly;
        else if (act == "override") sc.engine.validity_action = ValidityAction::Override;
        else fail("/engine/validity_action", "expected refuse|warn|override");
        sc.engine.thresholds.warn = num(ej, "/engine", "warn_threshold", 1e-2);
        sc.engine.thresholds.refuse = num(ej, "/engine", "refuse_threshold", 1e-1);
        sc.engine.probe.samples_per_segment = integer(ej, "/engine", "probe_samples", 1000);
        ecanon = {{"orders", sc.engine.max_order},
                  {"quad_nodes", sc.engine.quad.nodes},
                  {"nested_nodes", sc.engine.nested.nodes},
                  {"validity_action", act},
                  {"warn_threshold", sc.engine.thresholds.warn},
                  {"refuse_threshold", sc.engine.thresholds.refuse},
                  {"probe_samples", sc.engine.probe.samples_per_segment}};
    }
    canon["engine"] = ecanon;

    // ---- validity overrides ----
    json vvcanon = json::object();
    if (config.contains("validity")) {
        const json& vj = config.at("validity");
        check_keys(vj, "/validity", {"d_m", "T_s", "scales_override"});
        if (vj.contains("d_m")) {
            sc.d_override = num(vj, "/validity", "d_m");
            vvcanon["d_m"] = *sc.d_override;
        }
        if (vj.contains("T_s")) {
            sc.seq.T_override = num(vj, "/validity", "T_s");
            vvcanon["T_s"] = *sc.seq.T_override;
        }
        if (vj.contains("scales_override")) {
            const json& so = vj.at("scales_override");
            check_keys(so, "/validity/scales_override",
                       {"delta_v_extremal_J", "delta_v_branch_J", "xi_m"});
            PotentialScales scales;
            scales.delta_v_extremal = num(so, "/validity/scales_override", "delta_v_extremal_J");
            scales.delta_v_branch = num(so, "/validity/scales_override", "delta_v_branch_J");
            scales.xi = num(so, "/validity/scales_override", "xi_m");
            sc.scales_override = scales;
            vvcanon["scales_override"] = {{"delta_v_extremal_J", scales.delta_v_extremal},
                                          {"delta_v_branch_J", scales.delta_v_branch},
                                          {"xi_m", scales.xi}};
        }
    }
    canon["validity"] = vvcanon;

    // ---- oracles ----
    json ocanon = json::object();
    if (config.contains("oracles")) {
        const json& oj = config.at("oracles");
        check_keys(oj, "/oracles", {"classical", "quantum", "tolerances"});
        if (oj.contains("classical")) {
            const json& cj = oj.at("classical");
            check_keys(cj, "/oracles/classical", {"enabled", "steps_per_segment", "richardson"});
            sc.run_classical = boolean(cj, "/oracles/classical", "enabled", true);
            sc.classical.steps_per_segment =
                integer(cj, "/oracles/classical", "steps_per_segment", 10000);
            sc.classical.richardson = boolean(cj, "/oracles/classical", "richardson", true);
            ocanon["classical"] = {{"enabled", sc.run_classical},
                                   {"steps_per_segment", sc.classical.steps_per_segment},
                                   {"richardson", sc.classical.richardson}};
        }
        if (oj.contains("quantum")) {
            const json& qj = oj.at("quantum");
            check_keys(qj, "/oracles/quantum",
                       {"enabled", "n_points", "steps_per_segment", "split_order", "pad_widths",
                        "pad_fraction", "convergence_check", "conv_tol_rad", "snapshots"});
            sc.run_quantum = boolean(qj, "/oracles/quantum", "enabled", true);
            sc.quantum.n_points = integer(qj, "/oracles/quantum", "n_points", 1 << 15);
            sc.quantum.steps_per_segment =
                integer(qj, "/oracles/quantum", "steps_per_segment", 4096);
            sc.quantum.split_order = integer(qj, "/oracles/quantum", "split_order", 4);
            sc.quantum.pad_widths = num(qj, "/oracles/quantum", "pad_widths", 10.0);
            sc.quantum.pad_fraction = num(qj, "/oracles/quantum", "pad_fraction", 0.25);
            sc.quantum.convergence_check =
                boolean(qj, "/oracles/quantum", "convergence_check", true);
            sc.quantum.conv_tol = num(qj, "/oracles/quantum", "conv_tol_rad", 1e-4);
            json snaps = json::array();
            if (qj.contains("snapshots")) {
                int si = 0;
                for (const json& sj : qj.at("snapshots")) {
                    const std::string where = "/oracles/quantum/snapshots/" + std::to_string(si++);
                    check_keys(sj, where, {"t_s", "path"});
                    sc.quantum.snapshot_times.emplace_back(num(sj, where, "t_s"),
                                                           str(sj, where, "path"));
                    snaps.push_back({{"t_s", sc.quantum.snapshot_times.back().first},
                                     {"path", sc.quantum.snapshot_times.back().second}});
                }
            }
            ocanon["quantum"] = {{"enabled", sc.run_quantum},
                                 {"n_points", sc.quantum.n_points},
                                 {"steps_per_segment", sc.quantum.steps_per_segment},
                                 {"split_order", sc.quantum.split_order},
                                 {"pad_widths", sc.quantum.pad_widths},
                                 {"pad_fraction", sc.quantum.pad_fraction},
                                 {"convergence_check", sc.quantum.convergence_check},
                                 {"conv_tol_rad", sc.quantum.conv_tol},
                                 {"snapshots", snaps}};
        }
        if (oj.contains("tolerances")) {
            const json& tj = oj.at("tolerances");
            check_keys(tj, "/oracles/tolerances",
                       {"classical_phase_rel", "quantum_phase_rel", "quantum_contrast_abs"});
            sc.tolerances.classical_phase_rel =
                num(tj, "/oracles/tolerances", "classical_phase_rel", 1e-3);
            sc.tolerances.quantum_phase_rel =
                num(tj, "/oracles/tolerances", "quantum_phase_rel", 1e-3);
            sc.tolerances.quantum_contrast_abs =
                num(tj, "/oracles/tolerances", "quantum_contrast_abs", 1e-3);
            ocanon["tolerances"] = {
                {"classical_phase_rel", sc.tolerances.classical_phase_rel},
                {"quantum_phase_rel", sc.tolerances.quantum_phase_rel},
                {"quantum_contrast_abs", sc.tolerances.quantum_contrast_abs}};
        }
    }
    canon["oracles"] = ocanon;

    // ---- output ----
    json outc = json::object();
    if (config.contains("output")) {
        const json& out = config.at("output");
        check_keys(out, "/output", {"result_path", "csv_path"});
        sc.result_path = str(out, "/output", "result_path", std::string());
        sc.csv_path = str(out, "/output", "csv_path", std::string());
        if (!sc.result_path.empty()) outc["result_path"] = sc.result_path;
        if (!sc.csv_path.empty()) outc["csv_path"] = sc.csv_path;
    }
    canon["output"] = outc;

    sc.canonical = std::move(canon);
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("scenario '") + path + "': " + e.what());
    }
    return build_scenario(j);
}

json validity_to_json(const ValidityReport& rep) {
    json v;
    v["delta_v_extremal_J"] = rep.scales.delta_v_extremal;
    v["delta_v_branch_J"] = rep.scales.delta_v_branch;
    v["xi_m"] = std::isfinite(rep.scales.xi) ? json(rep.scales.xi) : json("inf");
    v["grad_rms_J_per_m"] = rep.scales.grad_rms;
    v["scale_consistency_n2"] = rep.scales.scale_consistency_n2;
    v["T_s"] = rep.T;
    v["d_m"] = rep.d;
    v["epsilon"] = rep.epsilon;
    v["eta"] = rep.eta;
    v["d_over_xi"] = rep.d_over_xi;
    v["eta_d_over_xi"] = rep.eta_d_over_xi;
    v["warn"] = rep.warn;
    v["refuse"] = rep.refuse;
    if (rep.phi1_wavepacket_magnitude)
        v["phi1_wavepacket_magnitude_rad"] = *rep.phi1_wavepacket_magnitude;
    return v;
}

ValidityReport run_validity(const Scenario& sc) {
    PotentialScales scales = sc.scales_override
                                 ? *sc.scales_override
                                 : probe_scales(sc.seq, *sc.potential, sc.engine.probe);
    return validity_report(scales, sc.state, sc.seq, sc.engine.thresholds, sc.d_override);
}

ScenarioResult run_scenario(const Scenario& sc, bool with_engine, bool with_oracles) {
    ScenarioResult res;
    if (with_engine) {
        res.breakdown = phase_total(sc.seq, *sc.potential, sc.state, sc.engine);
        if (sc.d_override || sc.scales_override) {
            // recompute the report with the configured overrides
            PotentialScales scales = sc.scales_override ? *sc.scales_override
                                                        : res.breakdown.validity.scales;
            ValidityReport rep = validity_report(scales, sc.state, sc.seq, sc.engine.thresholds,
                                                 sc.d_override);
            rep.phi1_wavepacket_magnitude = res.breakdown.validity.phi1_wavepacket_magnitude;
            res.breakdown.validity = rep;
        }
    }
    if (with_oracles && sc.run_classical)
        res.classical = classical_oracle(sc.seq, *sc.potential, sc.classical);
    if (with_oracles && sc.run_quantum)
        res.quantum = quantum_oracle_1d(sc.seq, *sc.potential, sc.state, sc.quantum);
    if (with_engine && with_oracles && (sc.run_classical || sc.run_quantum)) {
        res.comparison = verify_engine(sc.seq, *sc.potential, sc.state, sc.engine, sc.classical,
                                       sc.quantum, sc.tolerances, sc.run_quantum);
    }
    return res;
}

json result_to_json(const Scenario& sc, const ScenarioResult& res) {
    json out;
    out["tool"] = {{"name", version::name}, {"version", version::number}};
    out["config"] = sc.canonical;
    json r;
    r["phase"] = {{"phi0_rad", res.breakdown.phi0},
                  {"phi1_classical_rad", res.breakdown.phi1_classical},
                  {"phi1_wavepacket_rad", res.breakdown.phi1_wavepacket},
                  {"phi2_rad", res.breakdown.phi2},
                  {"total_rad", res.breakdown.total()},
                  {"contrast", res.breakdown.contrast}};
    r["validity"] = validity_to_json(res.breakdown.validity);
    auto oracle_json = [](const OracleResult& o, bool quantum) {
        json oj;
        oj["phase_rad"] = o.phase;
        oj["contrast"] = o.contrast;
        oj["delta_r_m"] = vec3_json(o.delta_r);
        oj["p_mean_kg_m_per_s"] = vec3_json(o.p_mean);
        oj["phi_s_rad"] = o.phi_s;
        if (quantum) {
            oj["norm_drift"] = o.norm_drift;
            oj["convergence_dphi_rad"] = o.convergence_dphi;
        } else {
            oj["error_estimate_rad"] = o.error_estimate;
            oj["force_evaluations"] = o.evaluations;
        }
        return oj;
    };
    if (res.classical) r["classical_oracle"] = oracle_json(*res.classical, false);
    if (res.quantum) r["quantum_oracle"] = oracle_json(*res.quantum, true);
    if (res.comparison) {
        json rows = json::array();
        for (const auto& row : res.comparison->rows)
            rows.push_back({{"quantity", row.quantity},
                            {"engine", row.engine},
                            {"oracle", row.oracle},
                            {"difference", row.difference},
                            {"tolerance", row.tolerance},
                            {"pass", row.pass}});
        r["comparison"] = {{"rows", rows}, {"all_pass", res.comparison->all_pass}};
    }
    out["results"] = r;
    return out;
}

std::string run_sweep(const json& base_config, const std::string& param_pointer,
                      const std::vector<double>& values, int workers) {
    // resolve the pointer once against the base config to fail early
    const json::json_pointer ptr(param_pointer);
    {
        json probe = base_config;
        if (!probe.contains(ptr)) throw ConfigError("sweep: no value at '" + param_pointer + "'");
        if (!probe.at(ptr).is_number())
            throw ConfigError("sweep: '" + param_pointer + "' is not a scalar");
        probe[ptr] = 0.0;
        (void)probe;
    }

    std::ostringstream head;
    head << "# " << version::name << " " << version::number << " sweep of " << param_pointer
         << "\n";
    head << "param_value,phi0_rad,phi1_classical_rad,phi1_wavepacket_rad,phi2_rad,total_rad,"
            "contrast,epsilon,eta,d_over_xi,eta_d_over_xi\n";

    std::vector<std::string> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= values.size()) return;
            json cfg = base_config;
            cfg[ptr] = values[i];
            Scenario sc = build_scenario(cfg);
            ScenarioResult r = run_scenario(sc, true, false);
            std::ostringstream os;
            os.precision(17);
            os << values[i] << "," << r.breakdown.phi0 << "," << r.breakdown.phi1_classical << ","
               << r.breakdown.phi1_wavepacket << "," << r.breakdown.phi2 << ","
               << r.breakdown.total() << "," << r.breakdown.contrast << ","
               << r.breakdown.validity.epsilon << "," << r.breakdown.validity.eta << ","
               << r.breakdown.validity.d_over_xi << "," << r.breakdown.validity.eta_d_over_xi
               << "\n";
            rows[i] = os.str();
        }
    };
    const int nw = std::max(1, std::min<int>(workers, int(values.size())));
    if (nw <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    std::string out = head.str();
    for (const auto& row : rows) out += row;
    return out;
}

}  // namespace phaseloop
