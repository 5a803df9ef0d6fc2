#ifndef ADALAB_SERIALIZE_HPP
#define ADALAB_SERIALIZE_HPP

#include <ostream>

#include "json.hpp"

#include "adalab/gdsim.hpp"
#include "adalab/sq.hpp"

namespace adalab {

using nlohmann::json;

inline json transcript_to_json(const Transcript& tr) {
    json j;
    j["m"] = tr.m;
    j["T"] = tr.T;
    j["k"] = tr.k;
    j["seed"] = tr.seed;
    j["queries_stored"] = tr.queries_stored;
    j["rounds"] = json::array();
    int round = 1;
    for (const RoundRecord& r : tr.rounds) {
        json jr;
        jr["round"] = round++;
        jr["answers"] = r.answers;
        jr["raw_answers"] = r.raw_answers;
        jr["clamped"] = r.clamped;
        jr["population"] = r.population;
        jr["empirical"] = r.empirical;
        if (tr.queries_stored) {
            jr["queries"] = json::array();
            for (const Query& q : r.queries) jr["queries"].push_back(q.values);
        }
        j["rounds"].push_back(std::move(jr));
    }
    return j;
}

// One line per (round, query): round, index, answer, population, empirical.
inline void transcript_to_csv(std::ostream& os, const Transcript& tr) {
    os << "round,query,answer,population,empirical,clamped\n";
    int round = 1;
    for (const RoundRecord& r : tr.rounds) {
        for (std::size_t i = 0; i < r.answers.size(); ++i)
            os << round << ',' << i << ',' << r.answers[i] << ',' << r.population[i]
               << ',' << r.empirical[i] << ',' << int(r.clamped[i]) << '\n';
        ++round;
    }
}

inline json sim_transcript_to_json(const SimTranscript& tr) {
    json j;
    j["eta"] = tr.eta;
    j["seed"] = tr.seed;
    j["answers"] = tr.answers;
    j["node_path"] = tr.node_path;
    j["path_popvals"] = tr.path_popvals;
    j["projections_identity"] = tr.projections_identity;
    j["regime_ok"] = tr.regime_ok;
    j["trajectory"] = tr.trajectory;
    j["outputs"] = tr.outputs;
    return j;
}

} // namespace adalab

#endif
