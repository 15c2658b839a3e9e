#include "rbeim/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rbeim {

namespace {

using nlohmann::json;

constexpr int kStateVersion = 1;

json vec_to_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
    return out;
}

Vec vec_from_json(const json& j) {
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = {j[i][0].get<double>(), j[i][1].get<double>()};
    return v;
}

json mat_to_json(const Mat& m) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back({m(r, c).real(), m(r, c).imag()});
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Mat mat_from_json(const json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const json& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw std::runtime_error("state bundle: matrix payload size mismatch");
    Mat m(rows, cols);
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c, ++idx)
            m(r, c) = {data[idx][0].get<double>(), data[idx][1].get<double>()};
    return m;
}

json vecs_to_json(const std::vector<Vec>& vs) {
    json out = json::array();
    for (const Vec& v : vs) out.push_back(vec_to_json(v));
    return out;
}

std::vector<Vec> vecs_from_json(const json& j) {
    std::vector<Vec> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(vec_from_json(e));
    return out;
}

void check_header(const json& j, const std::string& type) {
    if (j.value("format", "") != "rbeim-state")
        throw std::runtime_error("state bundle: unknown format");
    if (j.value("version", -1) != kStateVersion)
        throw std::runtime_error("state bundle: unsupported version");
    if (j.value("type", "") != type)
        throw std::runtime_error("state bundle: expected type '" + type + "'");
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double double_or_inf(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

} // namespace

json rb_state_to_json(const ReducedBasisState& state) {
    json j;
    j["format"] = "rbeim-state";
    j["version"] = kStateVersion;
    j["type"] = "rb";
    j["selected"] = state.selected;
    j["raw_snapshots"] = vecs_to_json(state.raw_snapshots);
    j["basis"] = vecs_to_json(state.basis);
    json terms = json::array();
    for (const Mat& t : state.reduced_terms) terms.push_back(mat_to_json(t));
    j["reduced_terms"] = std::move(terms);
    j["reduced_rhs"] = vec_to_json(state.reduced_rhs);
    j["g00"] = vec_to_json(state.g00);
    j["delta"] = state.delta;
    json f = json::array(), w = json::array();
    for (const auto& fk : state.f) f.push_back(vecs_to_json(fk));
    for (const auto& wk : state.w) w.push_back(vecs_to_json(wk));
    j["f"] = std::move(f);
    j["w"] = std::move(w);
    j["s_vec"] = vec_to_json(state.s_vec);
    j["S_mat"] = mat_to_json(state.S_mat);
    j["greedy_history"] = state.greedy_history;
    j["warning"] = state.warning;
    return j;
}

ReducedBasisState rb_state_from_json(const json& j) {
    check_header(j, "rb");
    ReducedBasisState st;
    st.selected = j.at("selected").get<std::vector<double>>();
    st.raw_snapshots = vecs_from_json(j.at("raw_snapshots"));
    st.basis = vecs_from_json(j.at("basis"));
    for (const auto& t : j.at("reduced_terms")) st.reduced_terms.push_back(mat_from_json(t));
    st.reduced_rhs = vec_from_json(j.at("reduced_rhs"));
    st.g00 = vec_from_json(j.at("g00"));
    st.delta = j.at("delta").get<double>();
    for (const auto& fk : j.at("f")) st.f.push_back(vecs_from_json(fk));
    for (const auto& wk : j.at("w")) st.w.push_back(vecs_from_json(wk));
    st.s_vec = vec_from_json(j.at("s_vec"));
    st.S_mat = mat_from_json(j.at("S_mat"));
    st.greedy_history = j.at("greedy_history").get<std::vector<double>>();
    st.warning = j.at("warning").get<std::string>();
    if (st.basis.size() != st.selected.size() || st.basis.size() != st.raw_snapshots.size())
        throw std::runtime_error("state bundle: inconsistent basis payload");
    return st;
}

json eim_state_to_json(const EimState& state) {
    json j;
    j["format"] = "rbeim-state";
    j["version"] = kStateVersion;
    j["type"] = "eim";
    j["variant"] = eim_variant_name(state.variant);
    j["grid"] = state.grid;
    j["p_indices"] = state.p_indices;
    j["mu_indices"] = state.mu_indices;
    j["mus"] = state.mus;
    j["q_table"] = mat_to_json(state.q_table);
    j["B"] = mat_to_json(state.B);
    j["snap_cols"] = mat_to_json(state.snap_cols);
    json hist = json::array();
    for (const auto& h : state.history)
        hist.push_back({{"k", h.k},
                        {"det", {h.det.real(), h.det.imag()}},
                        {"cond", finite_or_null(h.cond)},
                        {"residual", h.residual}});
    j["history"] = std::move(hist);
    j["breakdown_step"] = state.breakdown_step;
    j["table"] = mat_to_json(state.table);
    return j;
}

EimState eim_state_from_json(const json& j) {
    check_header(j, "eim");
    EimState st;
    st.variant = parse_eim_variant(j.at("variant").get<std::string>());
    st.grid = j.at("grid").get<std::vector<double>>();
    st.p_indices = j.at("p_indices").get<std::vector<int>>();
    st.mu_indices = j.at("mu_indices").get<std::vector<int>>();
    st.mus = j.at("mus").get<std::vector<double>>();
    st.q_table = mat_from_json(j.at("q_table"));
    st.B = mat_from_json(j.at("B"));
    st.snap_cols = mat_from_json(j.at("snap_cols"));
    for (const auto& h : j.at("history")) {
        EimStepDiag d;
        d.k = h.at("k").get<int>();
        d.det = {h.at("det")[0].get<double>(), h.at("det")[1].get<double>()};
        d.cond = double_or_inf(h.at("cond"));
        d.residual = h.at("residual").get<double>();
        st.history.push_back(d);
    }
    st.breakdown_step = j.at("breakdown_step").get<int>();
    st.table = mat_from_json(j.at("table"));
    if (st.mus.size() != st.p_indices.size() || st.mus.size() != st.mu_indices.size())
        throw std::runtime_error("state bundle: inconsistent interpolation payload");
    return st;
}

void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << '\n';
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

} // namespace rbeim
