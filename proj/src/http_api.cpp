#include "practica/http_api.hpp"

#include <httplib.h>

#include <sstream>

namespace practica {

namespace {

HttpResponse error_response(int status, const std::string& code, const std::string& message, json extra = {}) {
    json err{{"code", code}, {"message", message}};
    if (extra.is_object())
        for (const auto& [k, v] : extra.items()) err[k] = v;
    return {status, {{"error", err}}};
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::string part;
    std::istringstream in(path);
    while (std::getline(in, part, '/'))
        if (!part.empty()) out.push_back(part);
    return out;
}

json parse_body(const HttpRequest& r) {
    if (r.body.empty()) return json::object();
    try {
        return json::parse(r.body);
    } catch (const json::parse_error& e) {
        throw BadRequest(std::string("request body is not valid JSON: ") + e.what());
    }
}

std::string move_from_body(const HttpRequest& r) {
    json body = parse_body(r);
    if (!body.is_object() || !body.contains("move") || !body["move"].is_string())
        throw BadRequest("body must be {\"move\": \"<statement id>\"}");
    return body["move"].get<std::string>();
}

}  // namespace

std::map<std::string, std::string> parse_evidence_query(const std::string& text) {
    std::map<std::string, std::string> out;
    if (text.empty()) return out;
    std::istringstream in(text);
    std::string pair;
    while (std::getline(in, pair, ',')) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size())
            throw BadRequest("evidence must look like variable:state,variable:state");
        const std::string var = pair.substr(0, colon);
        if (out.count(var)) throw BadRequest("evidence names " + var + " twice");
        out[var] = pair.substr(colon + 1);
    }
    return out;
}

HttpResponse ApiRouter::handle(const HttpRequest& request) {
    try {
        return route(request);
    } catch (const IllegalMove& e) {
        return error_response(409, "ILLEGAL_MOVE", e.what(), {{"legal_moves", e.legal()}});
    } catch (const DialogueEnded& e) {
        return error_response(410, "SESSION_ENDED", e.what());
    } catch (const NotFound& e) {
        return error_response(404, "NOT_FOUND", e.what());
    } catch (const BadRequest& e) {
        return error_response(400, "BAD_REQUEST", e.what());
    } catch (const ImpossibleEvidence& e) {
        return error_response(422, "IMPOSSIBLE_EVIDENCE", e.what(), {{"nodes", e.nodes()}});
    } catch (const InvalidEvidence& e) {
        return error_response(400, "INVALID_EVIDENCE", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "INTERNAL", e.what());
    }
}

HttpResponse ApiRouter::route(const HttpRequest& r) {
    const auto parts = split_path(r.path);
    auto method_not_allowed = [&] { return error_response(405, "METHOD_NOT_ALLOWED", r.method + " " + r.path); };

    if (!parts.empty() && parts[0] == "sessions") {
        if (parts.size() == 1) {
            if (r.method != "POST") return method_not_allowed();
            return {201, sessions_.create(request_from_json(parse_body(r)))};
        }
        const std::string& id = parts[1];
        if (parts.size() == 2) {
            if (r.method != "GET") return method_not_allowed();
            return {200, sessions_.state(id)};
        }
        if (parts.size() == 3) {
            const std::string& what = parts[2];
            if (what == "moves") {
                if (r.method == "GET") return {200, sessions_.moves(id)};
                if (r.method == "POST") return {200, sessions_.post_move(id, move_from_body(r))};
                return method_not_allowed();
            }
            if (what == "preview") {
                if (r.method != "POST") return method_not_allowed();
                return {200, sessions_.preview_move(id, move_from_body(r))};
            }
            if (what == "trace") {
                if (r.method != "GET") return method_not_allowed();
                return {200, sessions_.trace(id)};
            }
            if (what == "observations") {
                if (r.method != "POST") return method_not_allowed();
                json body = parse_body(r);
                if (!body.is_object() || !body.contains("values") || !body["values"].is_object())
                    throw BadRequest("body must be {\"values\": {\"variable\": \"state\"}}");
                std::map<std::string, std::string> values;
                for (const auto& [k, v] : body["values"].items()) {
                    if (!v.is_string()) throw BadRequest("observed state of " + k + " must be a string");
                    values[k] = v.get<std::string>();
                }
                return {200, sessions_.inject_observation(id, values)};
            }
        }
    }
    if (!parts.empty() && parts[0] == "practices") {
        if (parts.size() == 1) {
            if (r.method != "GET") return method_not_allowed();
            return practices();
        }
        if (parts.size() == 3 && parts[2] == "activation") {
            if (r.method != "GET") return method_not_allowed();
            return activation(parts[1], r);
        }
    }
    return error_response(404, "NOT_FOUND", "no route for " + r.method + " " + r.path);
}

HttpResponse ApiRouter::practices() {
    json list = json::array();
    for (const auto& [id, p] : sessions_.catalog().library.practices()) {
        json roles = json::array();
        for (Role role : p.social_context.roles) roles.push_back(to_string(role));
        json nodes = json::array();
        for (const auto& n : p.activation.definition().nodes)
            nodes.push_back({{"name", n.name}, {"states", n.states}, {"parents", n.parents}});
        json scenes = json::array();
        for (const auto& s : p.plan_pattern.scenes) scenes.push_back(s.id);
        json entry{{"id", id},
                   {"description", p.description},
                   {"roles", roles},
                   {"scenes", scenes},
                   {"root", p.activation.root()},
                   {"nodes", nodes}};
        entry["refines"] = p.refines ? json(*p.refines) : json(nullptr);
        list.push_back(std::move(entry));
    }
    return {200, {{"practices", list}}};
}

HttpResponse ApiRouter::activation(const std::string& id, const HttpRequest& r) {
    const SocialPractice* p = sessions_.catalog().library.find(id);
    if (!p) throw NotFound("unknown practice " + id);
    auto it = r.query.find("evidence");
    ContextObservation obs;
    obs.values = parse_evidence_query(it == r.query.end() ? std::string() : it->second);
    std::vector<std::string> notes;
    const Evidence ev = evidence_for(p->activation, obs, &notes);
    const Distribution d = posterior(p->activation, ev, p->activation.root());
    json dist = json::object();
    for (std::size_t i = 0; i < d.states.size(); ++i) dist[d.states[i]] = d.probabilities[i];
    json used = json::object();
    for (const auto& [k, v] : ev) used[k] = v;
    return {200,
            {{"practice", id}, {"evidence", used}, {"ignored", notes}, {"probability", d.at(kActiveState)},
             {"posterior", dist}}};
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer(ApiRouter& router) : impl_(std::make_unique<Impl>()) {
    auto handler = [&router](const httplib::Request& req, httplib::Response& res) {
        HttpRequest r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params) r.query[k] = v;
        r.body = req.body;
        HttpResponse out = router.handle(r);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    const char* pattern = R"(/.*)";
    impl_->server.Get(pattern, handler);
    impl_->server.Post(pattern, handler);
    impl_->server.Put(pattern, handler);
    impl_->server.Delete(pattern, handler);
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace practica
