#pragma once

#include <atomic>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qbm/config.hpp"
#include "qbm/errors.hpp"
#include "qbm/format.hpp"
#include "qbm/gaussian.hpp"
#include "qbm/steady_state.hpp"

// Steady-state phase-diagram sweeps. Cells are independent pure evaluations;
// a bounded worker pool fans them out and writes each result into its
// pre-assigned slot, so the output is identical no matter how the scheduler
// interleaves (byte-for-byte, jobs=1 vs jobs=N).

namespace qbm {

struct AxisSpec {
    std::string name;  // SystemParams field, or virtual axes "T", "alpha", or s/d
    double min = 0.0;
    double max = 1.0;
    int count = 2;

    double value(int i) const {
        if (count < 2) throw InvalidParams("axis '" + name + "' needs count >= 2");
        return min + (max - min) * static_cast<double>(i) / (count - 1);
    }
};

enum class Observable { LogNegativity, Entropy, SymplecticMin, SteadyMoment };

struct ObservableSpec {
    Observable kind = Observable::LogNegativity;
    std::string moment;  // for Observable::SteadyMoment: xx1|xx2|pp1|pp2|x1x2|x1p2

    std::string label() const {
        switch (kind) {
            case Observable::LogNegativity: return "log_negativity";
            case Observable::Entropy: return "entropy";
            case Observable::SymplecticMin: return "nu_min_pt";
            case Observable::SteadyMoment: return "moment_" + moment;
        }
        return "";
    }
};

inline ObservableSpec parse_observable(const std::string& s) {
    if (s == "logneg" || s == "log-negativity") return {Observable::LogNegativity, ""};
    if (s == "entropy") return {Observable::Entropy, ""};
    if (s == "numin" || s == "nu-min") return {Observable::SymplecticMin, ""};
    if (s.rfind("moment:", 0) == 0) {
        const std::string name = s.substr(7);
        for (const char* ok : {"xx1", "xx2", "pp1", "pp2", "x1x2", "x1p2"})
            if (name == ok) return {Observable::SteadyMoment, name};
        throw InvalidParams("unknown steady moment '" + name + "'");
    }
    throw InvalidParams("unknown observable '" + s +
                        "' (expected logneg|entropy|numin|moment:<name>)");
}

/// Sets a swept parameter on the fixed configuration. "T" moves both bath
/// temperatures together; "alpha" sets kappa = alpha * m * omega0^2.
inline void apply_axis_value(ParamSet& ps, const std::string& name, double v) {
    if (name == "T") {
        ps.sys.T1 = ps.sys.T2 = v;
    } else if (name == "alpha") {
        ps.sys.kappa = v * ps.sys.m * ps.sys.omega0 * ps.sys.omega0;
    } else {
        apply_config_entry(ps, name, fmt17(v));
    }
}

struct SweepSpec {
    AxisSpec axis1;
    std::optional<AxisSpec> axis2;
    ParamSet fixed;
    ObservableSpec observable;
};

struct SweepCell {
    double a1 = 0.0;
    double a2 = 0.0;  // unused for 1D sweeps
    double value = 0.0;
    std::string status = "ok";
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepCell> cells;  // row-major, axis1 outer
    int failed = 0;

    std::string to_csv() const {
        std::ostringstream os;
        os << spec.axis1.name;
        if (spec.axis2) os << ',' << spec.axis2->name;
        os << ',' << spec.observable.label() << ",status\r\n";
        for (const auto& c : cells) {
            os << fmt17(c.a1);
            if (spec.axis2) os << ',' << fmt17(c.a2);
            if (c.status == "ok") os << ',' << fmt17(c.value);
            else os << ',';
            os << ',' << c.status << "\r\n";
        }
        return os.str();
    }

    nlohmann::json metadata(const std::string& timestamp, const std::string& version) const {
        nlohmann::json axes = nlohmann::json::array();
        auto axis_json = [](const AxisSpec& a) {
            return nlohmann::json{
                {"name", a.name}, {"min", a.min}, {"max", a.max}, {"count", a.count}};
        };
        axes.push_back(axis_json(spec.axis1));
        if (spec.axis2) axes.push_back(axis_json(*spec.axis2));
        const SystemParams& p = spec.fixed.sys;
        return nlohmann::json{
            {"artifact", "qbm"},
            {"version", version},
            {"command", "sweep"},
            {"timestamp", timestamp},
            {"observable", spec.observable.label()},
            {"regime", to_string(p.regime)},
            {"axes", axes},
            {"cells", cells.size()},
            {"failed_cells", failed},
            {"fixed",
             {{"m", p.m}, {"omega0", p.omega0}, {"kappa", p.kappa}, {"gamma1", p.gamma1},
              {"gamma2", p.gamma2}, {"T1", p.T1}, {"T2", p.T2},
              {"s", spec.fixed.s}, {"d", spec.fixed.d}}},
        };
    }
};

/// Evaluates one steady-state observable; throws the usual typed errors.
inline double evaluate_steady_observable(const SystemParams& p, const ObservableSpec& obs) {
    const SteadyState ss = steady_state(p);
    switch (obs.kind) {
        case Observable::LogNegativity: return log_negativity(ss.gamma);
        case Observable::Entropy: return von_neumann_entropy(ss.gamma);
        case Observable::SymplecticMin: return nu_min_pt(ss.gamma);
        case Observable::SteadyMoment:
            if (obs.moment == "xx1") return ss.oracle.xx1;
            if (obs.moment == "xx2") return ss.oracle.xx2;
            if (obs.moment == "pp1") return ss.oracle.pp1;
            if (obs.moment == "pp2") return ss.oracle.pp2;
            if (obs.moment == "x1x2") return ss.oracle.x1x2;
            if (obs.moment == "x1p2") return ss.oracle.x1p2;
            throw InvalidParams("unknown steady moment '" + obs.moment + "'");
    }
    throw InvalidParams("unknown observable");
}

inline SweepResult run_sweep(const SweepSpec& spec, unsigned jobs = 1) {
    const int n1 = spec.axis1.count;
    const int n2 = spec.axis2 ? spec.axis2->count : 1;
    if (n1 < 2) throw InvalidParams("axis1 needs count >= 2");
    if (spec.axis2 && n2 < 2) throw InvalidParams("axis2 needs count >= 2");

    SweepResult result;
    result.spec = spec;
    result.cells.resize(static_cast<std::size_t>(n1) * n2);

    std::atomic<int> next{0};
    std::atomic<int> failed{0};
    auto worker = [&]() {
        for (int idx = next.fetch_add(1); idx < n1 * n2; idx = next.fetch_add(1)) {
            SweepCell& cell = result.cells[idx];
            cell.a1 = spec.axis1.value(idx / n2);
            cell.a2 = spec.axis2 ? spec.axis2->value(idx % n2) : 0.0;
            try {
                ParamSet ps = spec.fixed;
                apply_axis_value(ps, spec.axis1.name, cell.a1);
                if (spec.axis2) apply_axis_value(ps, spec.axis2->name, cell.a2);
                cell.value = evaluate_steady_observable(ps.sys, spec.observable);
                if (!std::isfinite(cell.value)) throw NonPositive("observable is not finite");
                cell.status = "ok";
            } catch (const Error& e) {
                cell.status = e.name();
                failed.fetch_add(1);
            }
        }
    };

    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    result.failed = failed.load();
    if (result.failed == static_cast<int>(result.cells.size()))
        throw InvalidParams("every sweep cell failed: " + result.cells.front().status);
    return result;
}

}  // namespace qbm
