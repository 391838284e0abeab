#include "practica/practice_selector.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "practica/text.hpp"

namespace practica {

// ---------------------------------------------------------------------------
// Library

std::vector<ModelDiagnostic> validate_library(const std::vector<SocialPractice>& practices) {
    std::vector<ModelDiagnostic> out;
    std::map<std::string, const SocialPractice*> by_id;
    for (const auto& p : practices) {
        for (auto& d : validate_practice(p)) out.push_back(std::move(d));
        if (!by_id.emplace(p.id, &p).second)
            out.push_back({Severity::error, "DUPLICATE_ID", "duplicate practice " + p.id, "practice:" + p.id});
    }
    for (const auto& p : practices) {
        if (p.refines && !by_id.count(*p.refines))
            out.push_back({Severity::error, "DANGLING_REFERENCE",
                           "practice " + p.id + " refines unknown practice " + *p.refines, "practice:" + p.id});
    }
    // Refinement chains must terminate.
    for (const auto& p : practices) {
        std::set<std::string> seen{p.id};
        const SocialPractice* cur = &p;
        while (cur->refines) {
            auto it = by_id.find(*cur->refines);
            if (it == by_id.end()) break;
            if (!seen.insert(it->first).second) {
                out.push_back({Severity::error, "REFINES_CYCLE", "refinement cycle through " + p.id,
                               "practice:" + p.id});
                break;
            }
            cur = it->second;
        }
    }
    return out;
}

PracticeLibrary::PracticeLibrary(std::vector<SocialPractice> practices) {
    if (auto diags = validate_library(practices); has_errors(diags)) throw ValidationError(std::move(diags));
    for (auto& p : practices) {
        std::string id = p.id;
        practices_.emplace(std::move(id), std::move(p));
    }
}

const SocialPractice* PracticeLibrary::find(const std::string& id) const {
    auto it = practices_.find(id);
    return it == practices_.end() ? nullptr : &it->second;
}

const SocialPractice& PracticeLibrary::at(const std::string& id) const {
    if (const auto* p = find(id)) return *p;
    throw std::out_of_range("unknown practice " + id);
}

std::vector<std::string> PracticeLibrary::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : practices_) out.push_back(id);
    return out;
}

std::vector<std::string> PracticeLibrary::children_of(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& [cid, p] : practices_)
        if (p.refines && *p.refines == id) out.push_back(cid);
    return out;
}

bool PracticeLibrary::is_ancestor(const std::string& ancestor, const std::string& id) const {
    const SocialPractice* cur = find(id);
    while (cur && cur->refines) {
        if (*cur->refines == ancestor) return true;
        cur = find(*cur->refines);
    }
    return false;
}

std::vector<ModelDiagnostic> validate_config(const SelectionConfig& cfg) {
    std::vector<ModelDiagnostic> out;
    auto error = [&](std::string message) {
        out.push_back({Severity::error, "RANGE", std::move(message), "config:selection"});
    };
    if (!(cfg.activation_threshold > 0.0 && cfg.activation_threshold <= 1.0))
        error("activation threshold must lie in (0,1]");
    if (!(cfg.margin >= 0.0 && cfg.margin < 1.0)) error("margin must lie in [0,1)");
    if (!(cfg.activation_threshold > cfg.margin)) error("activation threshold must exceed the margin");
    if (cfg.max_questions < 0) error("max clarification questions must be >= 0");
    if (!(cfg.switch_surprise >= 0.0 && cfg.switch_surprise <= 1.0)) error("switch surprise must lie in [0,1]");
    return out;
}

// ---------------------------------------------------------------------------
// Evidence and probabilities

Evidence evidence_for(const ActivationNetwork& net, const ContextObservation& obs, std::vector<std::string>* notes) {
    Evidence ev;
    for (const auto& [var, state] : obs.values) {
        auto n = net.index_of(var);
        if (!n) {
            if (notes) notes->push_back("network " + net.root() + " ignores unknown variable " + var);
            continue;
        }
        if (!net.state_index(*n, state)) {
            if (notes) notes->push_back("network " + net.root() + " ignores unknown state " + state + " of " + var);
            continue;
        }
        ev[var] = state;
    }
    return ev;
}

double activation_probability(const SocialPractice& practice, const Evidence& ev, std::vector<std::string>* notes) {
    const auto& net = practice.activation;
    Evidence usable;
    for (const auto& [var, state] : ev) {
        auto n = net.index_of(var);
        if (!n || !net.state_index(*n, state)) {
            if (notes) notes->push_back("practice " + practice.id + " ignores evidence " + var + "=" + state);
            continue;
        }
        usable[var] = state;
    }
    return posterior(net, usable, net.root()).at(kActiveState);
}

namespace {

const std::vector<std::string>* declared_physical(const SocialPractice& p, const std::string& var) {
    if (var == "place") return &p.physical_context.places;
    if (var == "actor") return &p.physical_context.actors;
    return nullptr;
}

// A declared physical value, the practice's own interpretation of it, or a state its network models.
bool compatible(const SocialPractice& p, const std::string& var, const std::string& value) {
    const auto* declared = declared_physical(p, var);
    if (!declared || declared->empty()) return true;
    if (std::find(declared->begin(), declared->end(), value) != declared->end()) return true;
    auto interp = p.social_context.interpretations.find(var);
    if (interp != p.social_context.interpretations.end() && interp->second.expected_state == value) return true;
    if (auto n = p.activation.index_of(var)) return p.activation.state_index(*n, value).has_value();
    return false;
}

}  // namespace

std::vector<std::string> candidate_practices(const PracticeLibrary& lib, const Identity& identity,
                                             const ContextObservation& obs) {
    std::vector<std::string> out;
    for (const auto& [id, p] : lib.practices()) {
        if (!p.has_role(identity.role)) continue;
        bool ok = true;
        for (const auto& [var, value] : obs.values)
            if (!compatible(p, var, value)) {
                ok = false;
                break;
            }
        if (ok) out.push_back(id);
    }
    return out;
}

std::string_view kind_name(const SelectionOutcome& o) {
    if (o.is_selected()) return "selected";
    if (o.is_ambiguous()) return "ambiguous";
    return "no_match";
}

// ---------------------------------------------------------------------------
// Selection

SelectionOutcome select_practice(const PracticeLibrary& lib, const std::vector<std::string>& candidates,
                                 const ContextObservation& obs, const SelectionConfig& cfg) {
    SelectionOutcome out;
    std::vector<std::string> ids = candidates;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    std::map<std::string, Evidence> evidence;
    for (const auto& id : ids) {
        const SocialPractice& p = lib.at(id);
        Evidence ev = evidence_for(p.activation, obs, &out.notes);
        try {
            out.ranking.push_back({id, activation_probability(p, ev)});
            evidence.emplace(id, std::move(ev));
        } catch (const ImpossibleEvidence& e) {
            out.notes.push_back("practice " + id + " excluded: " + e.what());
        }
    }
    std::sort(out.ranking.begin(), out.ranking.end(), [](const CandidateScore& a, const CandidateScore& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.practice < b.practice;
    });

    if (out.ranking.empty()) {
        out.result = NoMatch{0.0};
        return out;
    }

    const double top = out.ranking[0].probability;
    const double second = out.ranking.size() > 1 ? out.ranking[1].probability : 0.0;
    if (top >= cfg.activation_threshold && top - second >= cfg.margin) {
        out.result = Selected{out.ranking[0].practice, top};
        return out;
    }

    // Clarification questions: unobserved non-root nodes of the two leading networks,
    // scored by the summed information gain on each network's root.
    const std::size_t leaders = std::min<std::size_t>(2, out.ranking.size());
    std::set<std::string> roots;
    for (std::size_t i = 0; i < leaders; ++i) roots.insert(lib.at(out.ranking[i].practice).activation.root());
    std::map<std::string, double> gains;
    for (std::size_t i = 0; i < leaders; ++i) {
        const auto& id = out.ranking[i].practice;
        const auto& net = lib.at(id).activation;
        for (std::size_t n = 0; n < net.size(); ++n) {
            const std::string& name = net.node(n).name;
            if (roots.count(name) || obs.values.count(name)) continue;
            gains[name] += information_gain(net, evidence.at(id), name);
        }
    }
    std::vector<RankedQuestion> questions;
    for (const auto& [name, g] : gains)
        if (g > kGainTieTolerance) questions.push_back({name, g});
    sort_ranking(questions);

    if (top < cfg.activation_threshold && questions.empty()) {
        out.result = NoMatch{top};
        return out;
    }
    if (questions.size() > static_cast<std::size_t>(cfg.max_questions)) questions.resize(cfg.max_questions);
    out.result = Ambiguous{std::move(questions)};
    return out;
}

SelectionOutcome refine_practice(const PracticeLibrary& lib, const std::string& active, const ContextObservation& obs,
                                 const SelectionConfig& cfg) {
    const auto children = lib.children_of(active);
    if (children.empty()) {
        SelectionOutcome out;
        const SocialPractice& p = lib.at(active);
        const double prob = activation_probability(p, evidence_for(p.activation, obs, &out.notes));
        out.ranking.push_back({active, prob});
        out.result = Selected{active, prob};
        return out;
    }
    SelectionOutcome out = select_practice(lib, children, obs, cfg);
    if (out.is_no_match()) out.result = Ambiguous{};
    return out;
}

SelectionOutcome select_in_context(const PracticeLibrary& lib, const Identity& identity,
                                   const ContextObservation& obs, const SelectionConfig& cfg) {
    const auto candidates = candidate_practices(lib, identity, obs);
    const std::set<std::string> pool(candidates.begin(), candidates.end());

    std::vector<std::string> top_level;
    for (const auto& id : candidates) {
        const auto& parent = lib.at(id).refines;
        if (!parent || !pool.count(*parent)) top_level.push_back(id);
    }

    SelectionOutcome outcome = select_practice(lib, top_level, obs, cfg);
    while (outcome.is_selected()) {
        std::vector<std::string> kids;
        for (const auto& c : lib.children_of(outcome.selected().practice))
            if (pool.count(c)) kids.push_back(c);
        if (kids.empty()) break;
        SelectionOutcome refined = select_practice(lib, kids, obs, cfg);
        if (!refined.is_selected()) {
            outcome.notes.push_back("refinement of " + outcome.selected().practice + " is undecided; staying abstract");
            break;
        }
        refined.notes.insert(refined.notes.begin(), outcome.notes.begin(), outcome.notes.end());
        outcome = std::move(refined);
    }
    return outcome;
}

Reevaluation reevaluate(const ReevaluationContext& ctx, const std::string& active, const ExpectationEvent& event,
                        const ContextObservation& obs, const SelectionConfig& cfg) {
    const SocialPractice& practice = ctx.library.at(active);
    const auto gap = competence_gap(ctx.identity, practice);
    for (const auto& q : practice.plan_pattern.quit_conditions) {
        const bool norm_fired =
            q.kind == QuitCondition::Kind::norm_violation &&
            std::find(ctx.violated_norms.begin(), ctx.violated_norms.end(), q.ref) != ctx.violated_norms.end();
        if (norm_fired) return Abort{"norm_violation:" + q.ref};
        if (q.kind == QuitCondition::Kind::missing_competence && gap.count(q.ref))
            return Abort{"missing_competence:" + q.ref};
    }

    if (event.kind == ExpectationEvent::Kind::confirmed) return Continue{};

    SelectionOutcome outcome = select_in_context(ctx.library, ctx.identity, obs, cfg);
    if (!outcome.is_selected()) return Continue{};
    const std::string winner = outcome.selected().practice;
    if (winner == active || ctx.library.is_ancestor(winner, active)) return Continue{};

    EmotionDelta surprise;
    surprise[Emotion::surprise] = cfg.switch_surprise;
    return Switch{winner, surprise, std::move(outcome)};
}

}  // namespace practica
