#pragma once
// HTTP+JSON front end of the session service. The router is plain data in,
// plain data out; HttpServer binds it to a socket.

#include <map>
#include <memory>
#include <string>

#include "practica/session_service.hpp"

namespace practica {

struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct HttpResponse {
    int status = 200;
    json body;
};

// "k:v,k:v" -> {k: v}. Throws BadRequest on malformed input.
std::map<std::string, std::string> parse_evidence_query(const std::string& text);

class ApiRouter {
public:
    explicit ApiRouter(SessionManager& sessions) : sessions_(sessions) {}
    HttpResponse handle(const HttpRequest& request);

private:
    SessionManager& sessions_;
    HttpResponse route(const HttpRequest& request);
    HttpResponse practices();
    HttpResponse activation(const std::string& id, const HttpRequest& request);
};

class HttpServer {
public:
    explicit HttpServer(ApiRouter& router);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Blocks until stop(). Returns false when the address cannot be bound.
    bool listen(const std::string& host, int port);
    // Binds an ephemeral port and returns it (or -1); then call listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace practica
