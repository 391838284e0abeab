#pragma once
// Interactive sessions: the turn loop that wires practice selection, the
// practice runtime and the dialogue engine together, with an append-only,
// replayable trace per session.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "practica/dialogue_engine.hpp"
#include "practica/json_views.hpp"
#include "practica/practice_runtime.hpp"
#include "practica/practice_selector.hpp"

namespace practica {

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BadRequest : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Everything sessions can be created from.
struct Catalog {
    PracticeLibrary library;
    std::map<std::string, std::shared_ptr<const Scenario>> scenarios;

    // <dir>/practices/*.practice.json and <dir>/scenarios/*.scenario.json.
    static Catalog load(const std::filesystem::path& data_dir);
    const Scenario& scenario(const std::string& id) const;  // throws NotFound
};

struct SessionRequest {
    std::string scenario;
    std::optional<std::vector<std::string>> practices;  // absent: the whole library
    std::optional<Role> role;                            // absent: the scenario's role
    SelectionConfig config;

    bool operator==(const SessionRequest&) const = default;
};

json request_json(const SessionRequest& r);
SessionRequest request_from_json(const json& j);  // throws BadRequest

namespace trace_kind {
inline constexpr const char* observation = "observation";
inline constexpr const char* selection = "selection";
inline constexpr const char* move = "move";
inline constexpr const char* reply = "reply";
inline constexpr const char* violation = "violation";
inline constexpr const char* switch_ = "switch";
inline constexpr const char* emotion_update = "emotion_update";
inline constexpr const char* scene = "scene";
}  // namespace trace_kind

struct TraceEvent {
    int turn = 0;
    std::string kind;
    json payload;
    std::int64_t tick = 0;

    bool operator==(const TraceEvent&) const = default;
};

json trace_event_json(const TraceEvent& e);
TraceEvent trace_event_from_json(const json& j);

enum class SessionMode { active, clarification, ended };
std::string_view to_string(SessionMode m);

struct Session {
    std::string id;
    SessionRequest request;
    std::shared_ptr<const Scenario> scenario;
    std::shared_ptr<const PracticeLibrary> library;  // the practices of this session
    Identity identity;                               // the character the engine plays

    DialogueState dialogue;
    ContextObservation observation;  // everything observed so far
    std::optional<PracticeRun> run;
    std::vector<SelectionOutcome> selections;
    std::vector<std::vector<std::string>> turn_events;  // emitted event names per turn
    std::vector<std::string> diagnostics;
    std::vector<TraceEvent> trace;
    int turn = 0;
    std::int64_t tick = 0;

    SessionMode mode() const;
    const SocialPractice* active_practice() const;
};

struct TurnResult {
    int turn = 0;
    std::optional<std::string> move;  // absent for injected observations
    std::optional<std::string> reply;
    std::vector<EmittedEvent> events;
    std::set<std::string> meanings;
    std::vector<NormViolation> violations;
    std::vector<ExpectationEvent> expectations;
    std::optional<Reevaluation> reevaluation;
    std::optional<SceneStep> scene;
    std::vector<TraceEvent> trace;  // what this turn appends
};

// Pure: the session a request starts with. Throws NotFound, BadRequest.
Session create_session(const Catalog& catalog, const SessionRequest& request, std::string id);

// Pure: the successor session and what happened. Throws IllegalMove, DialogueEnded.
std::pair<Session, TurnResult> play_move(const Session& s, const std::string& move);
std::pair<Session, TurnResult> observe(const Session& s, const std::map<std::string, std::string>& values);

std::vector<std::string> legal_moves(const Session& s);  // empty when ended

json state_json(const Session& s);
json moves_json(const Session& s);
json turn_json(const TurnResult& t, const Session& after);
json trace_json(const Session& s);

// Rebuilds a session from its request and the moves/observations in `trace`.
// Throws std::runtime_error when the recorded trace disagrees with the recomputation.
Session replay(const Catalog& catalog, const SessionRequest& request, const std::string& id,
               const std::vector<TraceEvent>& trace);

std::string new_session_id();  // 128 random bits as 32 hex digits

// Files under <dir>: <id>.session.json (request and final state) and
// <id>.trace.jsonl (one trace event per line, appended per turn).
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path dir);

    void create(const Session& s);
    void append(const Session& after, const std::vector<TraceEvent>& events);
    bool exists(const std::string& id) const;
    SessionRequest request(const std::string& id) const;
    json stored_state(const std::string& id) const;
    std::vector<TraceEvent> trace(const std::string& id) const;
    std::vector<std::string> ids() const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::filesystem::path meta_path(const std::string& id) const;
    std::filesystem::path trace_path(const std::string& id) const;
    void write_meta(const Session& s);
};

// Thread-safe registry. Turns of one session are serialized; different sessions proceed in parallel.
class SessionManager {
public:
    explicit SessionManager(std::shared_ptr<const Catalog> catalog, std::optional<std::filesystem::path> store = {});

    json create(const SessionRequest& request);  // state view
    json state(const std::string& id);
    json moves(const std::string& id);
    json trace(const std::string& id);
    json post_move(const std::string& id, const std::string& move);
    json preview_move(const std::string& id, const std::string& move);
    json inject_observation(const std::string& id, const std::map<std::string, std::string>& values);

    Session snapshot(const std::string& id);
    const Catalog& catalog() const { return *catalog_; }

private:
    struct Entry {
        std::mutex mutex;
        Session session;
    };

    std::shared_ptr<const Catalog> catalog_;
    std::optional<SessionStore> store_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;

    std::shared_ptr<Entry> entry(const std::string& id);
    template <class F>
    json commit(const std::string& id, F&& step);
};

}  // namespace practica
