#include "scalesteg/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "scalesteg/error.hpp"

namespace scalesteg {

namespace {

Json cost_value(double v) { return std::isinf(v) ? Json(nullptr) : Json(v); }

template <class T>
T field(const Json& j, const char* name) {
    if (!j.contains(name)) throw Error(ErrorCode::invalid_key, std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_key, std::string("bad field '") + name + "': " + e.what());
    }
}

const Json& object_field(const Json& j, const char* name) {
    if (!j.is_object() || !j.contains(name) || !j.at(name).is_object()) {
        throw Error(ErrorCode::invalid_key, std::string("missing or malformed object '") + name + "'");
    }
    return j.at(name);
}

}  // namespace

Json to_json(const ChannelSpec& spec) {
    return Json{{"family", to_string(spec.family)},
                {"antialiasing", spec.antialiasing},
                {"sf", spec.sf},
                {"bicubic_a", spec.bicubic_a}};
}

ChannelSpec channel_from_json(const Json& j) {
    ChannelSpec spec;
    spec.family = parse_family(field<std::string>(j, "family"));
    spec.antialiasing = field<bool>(j, "antialiasing");
    spec.sf = field<double>(j, "sf");
    if (j.contains("bicubic_a")) spec.bicubic_a = field<double>(j, "bicubic_a");
    spec.validate();
    return spec;
}

Json to_json(const DesignParams& d) {
    return Json{{"p", d.p}, {"s", d.s}, {"N", d.n_target}, {"rate_bound", d.rate_bound}, {"table_rate", d.table_rate}};
}

Json to_json(const Lattice& l) {
    return Json{{"s", l.s}, {"row_start", l.row_start}, {"col_start", l.col_start}, {"rows", l.rows}, {"cols", l.cols}};
}

Lattice lattice_from_json(const Json& j) {
    Lattice l{field<int>(j, "s"), field<int>(j, "row_start"), field<int>(j, "col_start"), field<int>(j, "rows"),
              field<int>(j, "cols")};
    if (l.s < 1 || l.row_start < 0 || l.col_start < 0 || l.rows < 0 || l.cols < 0) {
        throw Error(ErrorCode::invalid_key, "lattice fields out of range");
    }
    return l;
}

Json to_json(const StcCode& code) {
    std::string column;
    for (auto b : code.column) column += b ? '1' : '0';
    return Json{{"h", code.height}, {"column", column}};
}

StcCode code_from_json(const Json& j) {
    StcCode code;
    code.height = field<int>(j, "h");
    code.column.clear();
    for (char ch : field<std::string>(j, "column")) {
        if (ch != '0' && ch != '1') throw Error(ErrorCode::invalid_key, "STC column must be a 0/1 string");
        code.column.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    try {
        code.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_key, e.what());
    }
    return code;
}

Json to_json(const StegoKey& key) {
    return Json{{"version", 1},
                {"channel", to_json(key.channel)},
                {"cover_height", key.cover_height},
                {"cover_width", key.cover_width},
                {"lattice", to_json(key.lattice)},
                {"stc", to_json(key.code)},
                {"seed", key.seed}};
}

StegoKey key_from_json(const Json& j) {
    StegoKey key;
    try {
        key.channel = channel_from_json(object_field(j, "channel"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_key, std::string("bad channel: ") + e.what());
    }
    key.cover_height = field<int>(j, "cover_height");
    key.cover_width = field<int>(j, "cover_width");
    if (key.cover_height < 1 || key.cover_width < 1) throw Error(ErrorCode::invalid_key, "cover dimensions must be positive");
    key.lattice = lattice_from_json(object_field(j, "lattice"));
    key.code = code_from_json(object_field(j, "stc"));
    key.seed = field<std::uint64_t>(j, "seed");
    return key;
}

Json to_json(const EmbedSite& site) {
    Json support = Json::array();
    for (std::size_t k = 0; k < site.support.size(); ++k) {
        support.push_back(Json{{"row", site.support[k].row},
                               {"col", site.support[k].col},
                               {"weight", site.weights[k]},
                               {"x", site.cover_values[k]},
                               {"mask_plus", static_cast<bool>(site.mask_plus[k])},
                               {"mask_minus", static_cast<bool>(site.mask_minus[k])}});
    }
    return Json{{"u", site.y.row},
                {"v", site.y.col},
                {"y", site.y_value},
                {"y_real", site.y_real},
                {"support", support},
                {"omega_plus", site.omega_plus},
                {"omega_minus", site.omega_minus},
                {"bound_plus", site.bound_plus},
                {"bound_minus", site.bound_minus},
                {"wet_plus", site.wet_plus},
                {"wet_minus", site.wet_minus}};
}

Json to_json(const EmbedPlan& plan) {
    Json sites = Json::array();
    for (const auto& s : plan.sites) sites.push_back(to_json(s));
    return Json{{"channel", to_json(plan.channel)},
                {"cover_dims", {plan.cover_height(), plan.cover_width()}},
                {"scaled_dims", {plan.scaled_height(), plan.scaled_width()}},
                {"lattice", to_json(plan.lattice)},
                {"capacity_bits", plan.capacity_bits},
                {"sites", sites}};
}

Json to_json(const PlanReport& r) {
    return Json{{"ok", r.ok},          {"failures", r.failures},   {"sites", r.sites},
                {"wet_plus", r.wet_plus}, {"wet_minus", r.wet_minus}, {"wet_both", r.wet_both},
                {"capacity_bits", r.capacity_bits}};
}

Json to_json(const DeltaMap& delta) {
    Json entries = Json::array();
    for (const auto& [c, d] : delta.entries()) entries.push_back(Json{{"row", c.row}, {"col", c.col}, {"delta", d}});
    return Json{{"height", delta.height()},
                {"width", delta.width()},
                {"l1", delta.l1_norm()},
                {"entries", entries}};
}

Json to_json(const CostMap& costs, const EmbedPlan& plan) {
    Json out = Json::array();
    for (std::size_t k = 0; k < costs.sites.size() && k < plan.sites.size(); ++k) {
        out.push_back(Json{{"u", plan.sites[k].y.row},
                           {"v", plan.sites[k].y.col},
                           {"rho_plus", cost_value(costs.sites[k].rho_plus)},
                           {"rho_minus", cost_value(costs.sites[k].rho_minus)}});
    }
    return out;
}

std::string costs_to_csv(const CostMap& costs, const EmbedPlan& plan) {
    std::ostringstream os;
    os.precision(17);
    os << "u,v,rho_plus,rho_minus\n";
    for (std::size_t k = 0; k < costs.sites.size() && k < plan.sites.size(); ++k) {
        os << plan.sites[k].y.row << ',' << plan.sites[k].y.col << ',';
        const auto put = [&os](double v) {
            if (std::isinf(v)) {
                os << "inf";
            } else {
                os << v;
            }
        };
        put(costs.sites[k].rho_plus);
        os << ',';
        put(costs.sites[k].rho_minus);
        os << '\n';
    }
    return os.str();
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_key, path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

}  // namespace scalesteg
