#pragma once

// JSON encodings: Witt elements as decimal-string coordinate vectors, series
// as ring descriptors plus term lists, symbol results with their certificates.

#include <json.hpp>

#include "recip/reciprocity.hpp"

namespace recip {

using nlohmann::json;

inline json witt_to_json(const WittElement& w) {
    json coords = json::array();
    for (i64 c : w.c) coords.push_back(std::to_string(c));
    return json{{"coords", coords}, {"p", w.ctx->p}, {"f", w.ctx->f}, {"N", w.ctx->N}};
}

inline WittElement witt_from_json(const json& j, CtxPtr ctx) {
    if (j.at("p").get<i64>() != ctx->p || j.at("f").get<int>() != ctx->f)
        throw spec_mismatch("witt_from_json: context mismatch");
    std::vector<i64> coords;
    for (const auto& s : j.at("coords")) coords.push_back(std::stoll(s.get<std::string>()));
    coords.resize(ctx->f, 0);
    return WittElement(ctx, std::move(coords));
}

inline json ring_to_json(const RingPtr& r) {
    json vars = json::array();
    for (int i = 0; i < r->nvars; ++i)
        vars.push_back(json{{"name", std::string(1, r->var[i].name)},
                            {"cap", r->var[i].cap},
                            {"window", r->var[i].window_low}});
    return json{{"vars", vars}, {"p", r->ctx->p}, {"f", r->ctx->f}, {"N", r->ctx->N}};
}

inline json series_to_json(const ZSeries& s) {
    json terms = json::array();
    for (const auto& [e, c] : s.terms) {
        json exp = json::array();
        for (int i = 0; i < s.ring->nvars; ++i) exp.push_back(e.get(i));
        terms.push_back(json{{"exp", exp}, {"coeff", witt_to_json(c)}});
    }
    return json{{"ring", ring_to_json(s.ring)},
                {"terms", terms},
                {"uncertainty",
                 json{{"p_floor", s.unc.p_floor == APREC_INF ? -1 : s.unc.p_floor},
                      {"cap", {s.unc.cap[0] == EXP_INF ? -1 : s.unc.cap[0],
                               s.unc.cap[1] == EXP_INF ? -1 : s.unc.cap[1]}}}}};
}

inline json symbol_to_json(const SymbolResult& r) {
    json pre = json::array();
    for (const auto& c : r.pre_reduction)
        pre.push_back(json{{"val", c.is_zero() ? json() : json(c.val)},
                           {"aprec", c.aprec},
                           {"unit", c.is_zero() ? json() : json(witt_to_json(c.u))}});
    return json{{"M", r.M},
                {"modulus", r.pM},
                {"coords", r.coords},
                {"provenance", r.provenance},
                {"certificate",
                 json{{"pre_reduction", pre},
                      {"precision_floor", r.precision_floor},
                      {"cap_stable", r.cap_stable}}},
                {"discard_log", r.discard_log},
                {"failure_log", r.failure_log}};
}

inline json gbelt_to_json(const GBeltReport& r) {
    return json{{"outer_pass", r.outer_pass},
                {"inner_pass", r.inner_pass},
                {"outer_min", r.outer_seen ? json::array({r.outer_min_num, r.outer_min_den}) : json()},
                {"inner_min", r.inner_seen ? json::array({r.inner_min_num, r.inner_min_den}) : json()}};
}

inline json zmod_to_json(const ZmodMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
        rows.push_back(row);
    }
    return json{{"p", m.p}, {"N", m.N}, {"rows", m.rows}, {"cols", m.cols}, {"entries", rows}};
}

inline json homology_to_json(const HomologyOrders& h) {
    return json{{"H0", h.exponent[0]}, {"H1", h.exponent[1]}, {"H2", h.exponent[2]}, {"H3", h.exponent[3]}};
}

} // namespace recip
