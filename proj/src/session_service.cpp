#include "practica/session_service.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "practica/scenario_format.hpp"
#include "practica/text.hpp"

namespace practica {

// ---------------------------------------------------------------------------
// Catalog and requests

Catalog Catalog::load(const std::filesystem::path& data_dir) {
    Catalog c;
    c.library = load_library(data_dir / "practices");
    for (auto& sc : load_scenarios(data_dir / "scenarios")) {
        std::string id = sc.id;
        if (c.scenarios.count(id)) throw std::runtime_error("duplicate scenario " + id);
        c.scenarios.emplace(std::move(id), std::make_shared<const Scenario>(std::move(sc)));
    }
    return c;
}

const Scenario& Catalog::scenario(const std::string& id) const {
    auto it = scenarios.find(id);
    if (it == scenarios.end()) throw NotFound("unknown scenario " + id);
    return *it->second;
}

json request_json(const SessionRequest& r) {
    json out{{"scenario", r.scenario}, {"config", config_json(r.config)}};
    if (r.practices) out["practices"] = *r.practices;
    if (r.role) out["role"] = to_string(*r.role);
    return out;
}

SessionRequest request_from_json(const json& j) {
    if (!j.is_object()) throw BadRequest("request body must be a JSON object");
    SessionRequest r;
    for (const auto& [k, v] : j.items()) {
        if (k == "scenario") {
            if (!v.is_string()) throw BadRequest("\"scenario\" must be a string");
            r.scenario = v.get<std::string>();
        } else if (k == "practices") {
            if (!v.is_array()) throw BadRequest("\"practices\" must be an array of practice ids");
            std::vector<std::string> ids;
            for (const auto& p : v) {
                if (!p.is_string()) throw BadRequest("\"practices\" must be an array of practice ids");
                ids.push_back(p.get<std::string>());
            }
            r.practices = std::move(ids);
        } else if (k == "role") {
            if (!v.is_string()) throw BadRequest("\"role\" must be a string");
            auto role = parse_role(v.get<std::string>());
            if (!role) throw BadRequest("unknown role " + v.get<std::string>());
            r.role = role;
        } else if (k == "config") {
            try {
                r.config = config_from_json(v);
            } catch (const std::invalid_argument& e) {
                throw BadRequest(e.what());
            }
        } else {
            throw BadRequest("unknown request field \"" + k + "\"");
        }
    }
    if (r.scenario.empty()) throw BadRequest("\"scenario\" is required");
    return r;
}

json trace_event_json(const TraceEvent& e) {
    return {{"turn", e.turn}, {"kind", e.kind}, {"tick", e.tick}, {"payload", e.payload}};
}

TraceEvent trace_event_from_json(const json& j) {
    TraceEvent e;
    e.turn = j.at("turn").get<int>();
    e.kind = j.at("kind").get<std::string>();
    e.tick = j.at("tick").get<std::int64_t>();
    e.payload = j.at("payload");
    return e;
}

std::string_view to_string(SessionMode m) {
    switch (m) {
        case SessionMode::active: return "active";
        case SessionMode::clarification: return "clarification";
        case SessionMode::ended: return "ended";
    }
    return "active";
}

SessionMode Session::mode() const {
    if (dialogue.terminal) return SessionMode::ended;
    if (!run) return SessionMode::clarification;
    return SessionMode::active;
}

const SocialPractice* Session::active_practice() const { return run ? library->find(run->practice) : nullptr; }

// ---------------------------------------------------------------------------
// Turn loop

namespace {

void emit(Session& s, TurnResult& r, const char* kind, json payload) {
    TraceEvent e{s.turn, kind, std::move(payload), ++s.tick};
    s.trace.push_back(e);
    r.trace.push_back(std::move(e));
}

void update_emotions(Session& s, TurnResult& r, const EmotionDelta& delta, const std::string& cause) {
    const EmotionVector before = s.dialogue.emotions;
    s.dialogue.emotions = clamp_update(before, delta);
    emit(s, r, trace_kind::emotion_update,
         {{"cause", cause}, {"delta", delta_json(difference(s.dialogue.emotions, before))},
          {"emotions", emotions_json(s.dialogue.emotions)}});
}

std::string selection_note(const SelectionOutcome& o) {
    if (o.is_ambiguous()) {
        std::vector<std::string> nodes;
        for (const auto& q : o.ambiguous().questions) nodes.push_back(q.node);
        return "practice selection is ambiguous" + (nodes.empty() ? std::string() : "; ask about: " + join(nodes, ", "));
    }
    if (o.ranking.empty()) return "no candidate practice for this identity and context";
    return "no practice is active enough to be selected";
}

void start(Session& s, TurnResult& r, const std::string& practice_id) {
    const SocialPractice& p = s.library->at(practice_id);
    PracticeRun run = start_run(p);
    fast_forward(run, p, s.turn_events, GuardContext{s.dialogue.emotions, s.dialogue.parameters});
    s.run = std::move(run);
    emit(s, r, trace_kind::scene, {{"practice", p.id}, {"step", "start"}, {"run", run_json(*s.run, &p)}});
}

void select(Session& s, TurnResult& r, const char* cause) {
    SelectionOutcome o = select_in_context(*s.library, s.identity, s.observation, s.request.config);
    json payload = selection_json(o);
    payload["cause"] = cause;
    emit(s, r, trace_kind::selection, std::move(payload));
    s.selections.push_back(o);
    if (o.is_selected())
        start(s, r, o.selected().practice);
    else
        s.diagnostics.push_back(selection_note(o));
}

void handle_reevaluation(Session& s, TurnResult& r, const ExpectationEvent& violated) {
    std::vector<std::string> norms;
    for (const auto& e : s.run->ledger) norms.push_back(e.norm);
    ReevaluationContext ctx{*s.library, s.identity, norms};
    Reevaluation res = reevaluate(ctx, s.run->practice, violated, s.observation, s.request.config);
    r.reevaluation = res;

    if (auto* abort = std::get_if<Abort>(&res)) {
        s.run->status = PracticeRun::Status::quit;
        s.run->quit_reason = abort->reason;
        emit(s, r, trace_kind::scene,
             {{"practice", s.run->practice}, {"step", "quit"}, {"reason", abort->reason},
              {"run", run_json(*s.run, s.active_practice())}});
        return;
    }
    auto* sw = std::get_if<Switch>(&res);
    if (!sw) return;

    json sel = selection_json(sw->selection);
    sel["cause"] = "reevaluation";
    emit(s, r, trace_kind::selection, std::move(sel));
    s.selections.push_back(sw->selection);

    PracticeRun old = *s.run;
    old.status = PracticeRun::Status::quit;
    old.quit_reason = "switched:" + sw->practice;
    const SocialPractice& next = s.library->at(sw->practice);
    PracticeRun fresh = start_run(next);
    fast_forward(fresh, next, s.turn_events, GuardContext{s.dialogue.emotions, s.dialogue.parameters});
    s.run = fresh;
    emit(s, r, trace_kind::switch_,
         {{"from", old.practice}, {"to", next.id}, {"effect", delta_json(sw->effect)},
          {"old_run", run_json(old, s.library->find(old.practice))}, {"new_run", run_json(fresh, &next)}});
    update_emotions(s, r, sw->effect, "switch");
}

void absorb_observation(Session& s, TurnResult& r, const std::map<std::string, std::string>& delta) {
    if (delta.empty()) return;
    for (const auto& [k, v] : delta) s.observation.values[k] = v;
    s.observation.tick = s.tick;

    if (!s.run) {
        select(s, r, "clarification");
        return;
    }
    if (s.run->status == PracticeRun::Status::quit) return;
    const SocialPractice& p = *s.active_practice();
    auto events = expectation_check(p, ContextObservation{delta, s.tick});
    const ExpectationEvent* first_violation = nullptr;
    for (const auto& e : events) {
        r.expectations.push_back(e);
        if (e.kind != ExpectationEvent::Kind::violated) continue;
        json payload = expectation_json(e);
        payload["practice"] = p.id;
        emit(s, r, trace_kind::violation, std::move(payload));
    }
    for (const auto& e : r.expectations)
        if (e.kind == ExpectationEvent::Kind::violated) {
            first_violation = &e;
            break;
        }
    if (first_violation) handle_reevaluation(s, r, *first_violation);
}

json parameters_json(const std::map<std::string, double>& ps) {
    json out = json::object();
    for (const auto& [k, v] : ps) out[k] = v;
    return out;
}

}  // namespace

Session create_session(const Catalog& catalog, const SessionRequest& request, std::string id) {
    Session s;
    s.id = std::move(id);
    s.request = request;
    auto it = catalog.scenarios.find(request.scenario);
    if (it == catalog.scenarios.end()) throw NotFound("unknown scenario " + request.scenario);
    s.scenario = it->second;
    const Scenario& sc = *s.scenario;

    if (request.role && *request.role != sc.role_played)
        throw BadRequest("scenario " + sc.id + " is played as " + std::string(to_string(sc.role_played)) + ", not " +
                         std::string(to_string(*request.role)));
    if (auto diags = validate_config(request.config); has_errors(diags)) throw BadRequest(diags.front().message);

    std::vector<SocialPractice> chosen;
    if (request.practices) {
        std::set<std::string> seen;
        for (const auto& pid : *request.practices) {
            const SocialPractice* p = catalog.library.find(pid);
            if (!p) throw NotFound("unknown practice " + pid);
            if (seen.insert(pid).second) chosen.push_back(*p);
        }
    } else {
        for (const auto& [_, p] : catalog.library.practices()) chosen.push_back(p);
    }
    try {
        s.library = std::make_shared<const PracticeLibrary>(std::move(chosen));
    } catch (const ValidationError& e) {
        throw BadRequest(std::string("invalid practice set: ") + e.what());
    }

    s.identity = sc.agent;
    s.dialogue = init_state(sc);
    s.observation = sc.preamble;

    TurnResult r;
    json values = json::object();
    for (const auto& [k, v] : sc.preamble.values) values[k] = v;
    emit(s, r, trace_kind::observation, {{"source", "preamble"}, {"values", values}});
    s.observation.tick = s.tick;
    if (s.library->empty()) s.diagnostics.push_back("practice set is empty");
    // The initial selection always goes on record, even over an empty set.
    SelectionOutcome o = select_in_context(*s.library, s.identity, s.observation, request.config);
    json payload = selection_json(o);
    payload["cause"] = "initial";
    TraceEvent e{s.turn, trace_kind::selection, std::move(payload), ++s.tick};
    s.trace.push_back(std::move(e));
    s.selections.push_back(o);
    if (o.is_selected()) {
        const SocialPractice& p = s.library->at(o.selected().practice);
        s.run = start_run(p);
    } else {
        s.diagnostics.push_back(selection_note(o));
    }
    return s;
}

std::pair<Session, TurnResult> play_move(const Session& s0, const std::string& move) {
    if (s0.dialogue.terminal) throw DialogueEnded();
    const Scenario& sc = *s0.scenario;
    MoveOutcome out = apply_move(sc, s0.dialogue, move);

    Session s = s0;
    TurnResult r;
    s.turn += 1;
    r.turn = s.turn;
    r.move = move;
    r.reply = out.reply;
    r.events = out.events;
    s.dialogue = out.state;

    std::vector<std::string> names;
    for (const auto& e : out.events) names.push_back(e.name);
    s.turn_events.push_back(names);

    const StatementNode* node = sc.find_node(move);
    const SocialPractice* practice = s.active_practice();
    r.meanings = practice ? meaning_of(sc, move, *practice, s0.dialogue) : node->meaning_tags;
    if (s.run && s.run->status != PracticeRun::Status::quit) s.run->meaning_log.push_back({s.turn, move, r.meanings});

    emit(s, r, trace_kind::move,
         {{"statement", move},
          {"text", node->text},
          {"meanings", r.meanings},
          {"events", names},
          {"parameter_change", parameters_json(out.parameter_change)},
          {"emotion_change", delta_json(out.emotion_change)},
          {"interleave_advanced", out.interleave_advanced}});
    if (out.reply) {
        const StatementNode* reply = sc.find_node(*out.reply);
        emit(s, r, trace_kind::reply, {{"statement", reply->id}, {"text", reply->text}, {"tags", reply->meaning_tags}});
    }
    if (!out.emotion_change.is_zero())
        emit(s, r, trace_kind::emotion_update,
             {{"cause", "statements"}, {"delta", delta_json(out.emotion_change)},
              {"emotions", emotions_json(s.dialogue.emotions)}});

    if (s.run && practice && s.run->status != PracticeRun::Status::quit) {
        auto violations =
            norm_check(*s.run, *practice, names, GuardContext{s.dialogue.emotions, s.dialogue.parameters});
        record_violations(*s.run, violations, s.turn);
        for (const auto& v : violations) {
            json payload = norm_violation_json(v);
            payload["practice"] = practice->id;
            emit(s, r, trace_kind::violation, std::move(payload));
            if (!v.effect.is_zero()) update_emotions(s, r, v.effect, "norm:" + v.norm);
        }
        r.violations = violations;

        const EmotionVector emotions = s.dialogue.emotions;
        SceneStep step = scene_step(*s.run, *practice, names, s.identity, GuardContext{emotions, s.dialogue.parameters});
        r.scene = step;
        const PracticeRun before = *s.run;
        apply_step(*s.run, *practice, step);
        if (!(before == *s.run)) {
            json payload = scene_step_json(step);
            payload["practice"] = practice->id;
            payload["run"] = run_json(*s.run, practice);
            emit(s, r, trace_kind::scene, std::move(payload));
        }
    }

    if (!out.observations.empty()) {
        json values = json::object();
        for (const auto& [k, v] : out.observations) values[k] = v;
        emit(s, r, trace_kind::observation, {{"source", "statement"}, {"statement", move}, {"values", values}});
        absorb_observation(s, r, out.observations);
    }
    return {std::move(s), std::move(r)};
}

std::pair<Session, TurnResult> observe(const Session& s0, const std::map<std::string, std::string>& values) {
    if (s0.dialogue.terminal) throw DialogueEnded();
    if (values.empty()) throw BadRequest("no observation values");
    for (const auto& [k, v] : values)
        if (k.empty() || v.empty()) throw BadRequest("observation variables and states must be non-empty");
    Session s = s0;
    TurnResult r;
    r.turn = s.turn;
    json payload = json::object();
    for (const auto& [k, v] : values) payload[k] = v;
    emit(s, r, trace_kind::observation, {{"source", "injected"}, {"values", payload}});
    absorb_observation(s, r, values);
    return {std::move(s), std::move(r)};
}

std::vector<std::string> legal_moves(const Session& s) {
    if (s.dialogue.terminal) return {};
    return available_moves(*s.scenario, s.dialogue);
}

// ---------------------------------------------------------------------------
// Views

json moves_json(const Session& s) {
    json moves = json::array();
    for (const auto& id : legal_moves(s)) moves.push_back(statement_json(*s.scenario->find_node(id)));
    return {{"session", s.id}, {"terminal", s.dialogue.terminal}, {"moves", moves}};
}

json state_json(const Session& s) {
    const Scenario& sc = *s.scenario;
    json out;
    out["id"] = s.id;
    out["scenario"] = sc.id;
    out["title"] = sc.title;
    out["role"] = to_string(sc.role_played);
    out["agent"] = {{"id", s.identity.agent_id}, {"role", to_string(s.identity.role)},
                    {"competences", s.identity.competences}};
    out["mode"] = to_string(s.mode());
    out["turn"] = s.turn;
    out["tick"] = s.tick;
    out["practices"] = s.library->ids();
    out["practice"] = s.run ? run_json(*s.run, s.active_practice()) : json(nullptr);
    out["selection"] = s.selections.empty() ? json(nullptr) : selection_json(s.selections.back());
    out["emotions"] = emotions_json(s.dialogue.emotions);
    out["dominant_emotion"] = to_string(dominant_emotion(s.dialogue.emotions));
    out["parameters"] = parameters_json(s.dialogue.parameters);
    json il = {{"index", s.dialogue.interleave}};
    if (s.dialogue.interleave < sc.interleaves.size()) il["id"] = sc.interleaves[s.dialogue.interleave].id;
    out["interleave"] = il;
    out["active_tree"] = s.dialogue.active_tree ? json(*s.dialogue.active_tree) : json(nullptr);
    out["current_node"] = s.dialogue.current_node ? json(*s.dialogue.current_node) : json(nullptr);
    out["finished_trees"] = s.dialogue.finished_trees;
    out["history"] = s.dialogue.history;
    out["terminal"] = s.dialogue.terminal;
    json last = nullptr;
    for (auto it = s.dialogue.history.rbegin(); it != s.dialogue.history.rend(); ++it) {
        const StatementNode* n = sc.find_node(*it);
        if (n && n->speaker == Speaker::computer) {
            last = {{"id", n->id}, {"text", n->text}};
            break;
        }
    }
    out["last_reply"] = last;
    json obs = json::object();
    for (const auto& [k, v] : s.observation.values) obs[k] = v;
    out["observation"] = obs;
    out["moves"] = moves_json(s)["moves"];
    out["diagnostics"] = s.diagnostics;
    out["trace_length"] = s.trace.size();
    return out;
}

json turn_json(const TurnResult& t, const Session& after) {
    json out;
    out["turn"] = t.turn;
    out["move"] = t.move ? json(*t.move) : json(nullptr);
    if (t.reply) {
        const StatementNode* n = after.scenario->find_node(*t.reply);
        out["reply"] = {{"id", n->id}, {"text", n->text}};
    } else {
        out["reply"] = nullptr;
    }
    json events = json::array();
    for (const auto& e : t.events) events.push_back({{"name", e.name}, {"source", e.source}});
    out["events"] = events;
    out["meanings"] = t.meanings;
    json violations = json::array();
    for (const auto& v : t.violations) violations.push_back(norm_violation_json(v));
    for (const auto& e : t.expectations)
        if (e.kind == ExpectationEvent::Kind::violated) violations.push_back(expectation_json(e));
    out["violations"] = violations;
    json expectations = json::array();
    for (const auto& e : t.expectations) expectations.push_back(expectation_json(e));
    out["expectations"] = expectations;
    if (t.reevaluation) {
        json re;
        if (std::holds_alternative<Continue>(*t.reevaluation)) {
            re["kind"] = "continue";
        } else if (const auto* sw = std::get_if<Switch>(&*t.reevaluation)) {
            re["kind"] = "switch";
            re["practice"] = sw->practice;
            re["effect"] = delta_json(sw->effect);
        } else {
            re["kind"] = "abort";
            re["reason"] = std::get<Abort>(*t.reevaluation).reason;
        }
        out["reevaluation"] = re;
    } else {
        out["reevaluation"] = nullptr;
    }
    out["scene"] = t.scene ? scene_step_json(*t.scene) : json(nullptr);
    json trace = json::array();
    for (const auto& e : t.trace) trace.push_back(trace_event_json(e));
    out["trace"] = trace;
    out["state"] = state_json(after);
    return out;
}

json trace_json(const Session& s) {
    json events = json::array();
    for (const auto& e : s.trace) events.push_back(trace_event_json(e));
    return {{"session", s.id}, {"request", request_json(s.request)}, {"events", events}};
}

// ---------------------------------------------------------------------------
// Replay

Session replay(const Catalog& catalog, const SessionRequest& request, const std::string& id,
               const std::vector<TraceEvent>& trace) {
    Session s = create_session(catalog, request, id);
    auto check = [&](std::size_t from) {
        for (std::size_t j = from; j < s.trace.size(); ++j)
            if (j >= trace.size() || !(s.trace[j] == trace[j]))
                throw std::runtime_error("trace of session " + id + " diverges from recomputation at event " +
                                         std::to_string(j));
    };
    check(0);
    std::size_t i = s.trace.size();
    while (i < trace.size()) {
        const TraceEvent& e = trace[i];
        if (e.kind == trace_kind::move) {
            s = play_move(s, e.payload.at("statement").get<std::string>()).first;
        } else if (e.kind == trace_kind::observation && e.payload.value("source", "") == "injected") {
            std::map<std::string, std::string> values;
            for (const auto& [k, v] : e.payload.at("values").items()) values[k] = v.get<std::string>();
            s = observe(s, values).first;
        } else {
            throw std::runtime_error("trace event " + std::to_string(i) + " (" + e.kind + ") does not start a turn");
        }
        check(i);
        i = s.trace.size();
    }
    return s;
}

std::string new_session_id() {
    static std::mutex m;
    static std::random_device device;
    std::lock_guard lock(m);
    std::string out;
    char buf[9];
    for (int i = 0; i < 4; ++i) {
        std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(device()));
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Store

namespace {

json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw NotFound("cannot read " + p.string());
    return json::parse(in);
}

bool valid_id(const std::string& id) {
    return !id.empty() && id.size() <= 64 &&
           std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; });
}

}  // namespace

SessionStore::SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::filesystem::path SessionStore::meta_path(const std::string& id) const {
    if (!valid_id(id)) throw NotFound("unknown session " + id);
    return dir_ / (id + ".session.json");
}

std::filesystem::path SessionStore::trace_path(const std::string& id) const {
    if (!valid_id(id)) throw NotFound("unknown session " + id);
    return dir_ / (id + ".trace.jsonl");
}

void SessionStore::write_meta(const Session& s) {
    const json meta{{"id", s.id}, {"request", request_json(s.request)}, {"state", state_json(s)}};
    const auto path = meta_path(s.id);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << meta.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

void SessionStore::create(const Session& s) {
    {
        std::ofstream out(trace_path(s.id), std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write trace of " + s.id);
        for (const auto& e : s.trace) out << trace_event_json(e).dump() << "\n";
    }
    write_meta(s);
}

void SessionStore::append(const Session& after, const std::vector<TraceEvent>& events) {
    std::string lines;
    for (const auto& e : events) lines += trace_event_json(e).dump() + "\n";
    {
        std::ofstream out(trace_path(after.id), std::ios::app);
        if (!out) throw std::runtime_error("cannot append to trace of " + after.id);
        out << lines;
        out.flush();
        if (!out) throw std::runtime_error("cannot append to trace of " + after.id);
    }
    write_meta(after);
}

bool SessionStore::exists(const std::string& id) const {
    return valid_id(id) && std::filesystem::exists(dir_ / (id + ".session.json"));
}

SessionRequest SessionStore::request(const std::string& id) const {
    return request_from_json(read_json_file(meta_path(id)).at("request"));
}

json SessionStore::stored_state(const std::string& id) const { return read_json_file(meta_path(id)).at("state"); }

std::vector<TraceEvent> SessionStore::trace(const std::string& id) const {
    std::ifstream in(trace_path(id));
    if (!in) throw NotFound("unknown session " + id);
    std::vector<TraceEvent> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(trace_event_from_json(json::parse(line)));
    return out;
}

std::vector<std::string> SessionStore::ids() const {
    std::vector<std::string> out;
    const std::string suffix = ".session.json";
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            out.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Manager

SessionManager::SessionManager(std::shared_ptr<const Catalog> catalog, std::optional<std::filesystem::path> store)
    : catalog_(std::move(catalog)) {
    if (store) store_.emplace(*store);
}

std::shared_ptr<SessionManager::Entry> SessionManager::entry(const std::string& id) {
    std::lock_guard lock(mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
    if (!store_ || !store_->exists(id)) throw NotFound("unknown session " + id);
    auto e = std::make_shared<Entry>();
    e->session = replay(*catalog_, store_->request(id), id, store_->trace(id));
    if (state_json(e->session) != store_->stored_state(id))
        throw std::runtime_error("stored state of session " + id + " differs from its replay");
    sessions_.emplace(id, e);
    return e;
}

json SessionManager::create(const SessionRequest& request) {
    auto e = std::make_shared<Entry>();
    std::string id;
    {
        std::lock_guard lock(mutex_);
        do id = new_session_id();
        while (sessions_.count(id) || (store_ && store_->exists(id)));
    }
    e->session = create_session(*catalog_, request, id);
    if (store_) store_->create(e->session);
    json out = state_json(e->session);
    std::lock_guard lock(mutex_);
    sessions_.emplace(id, std::move(e));
    return out;
}

json SessionManager::state(const std::string& id) {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    return state_json(e->session);
}

json SessionManager::moves(const std::string& id) {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    return moves_json(e->session);
}

json SessionManager::trace(const std::string& id) {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    return trace_json(e->session);
}

Session SessionManager::snapshot(const std::string& id) {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    return e->session;
}

template <class F>
json SessionManager::commit(const std::string& id, F&& step) {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    auto [after, result] = step(e->session);
    if (store_) store_->append(after, result.trace);
    json out = turn_json(result, after);
    e->session = std::move(after);
    return out;
}

json SessionManager::post_move(const std::string& id, const std::string& move) {
    return commit(id, [&](const Session& s) { return play_move(s, move); });
}

json SessionManager::preview_move(const std::string& id, const std::string& move) {
    auto e = entry(id);
    std::lock_guard lock(e->mutex);
    auto [after, result] = play_move(e->session, move);
    return turn_json(result, after);
}

json SessionManager::inject_observation(const std::string& id, const std::map<std::string, std::string>& values) {
    return commit(id, [&](const Session& s) { return observe(s, values); });
}

}  // namespace practica
