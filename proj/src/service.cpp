#include "fabsearch/service.hpp"

#include <charconv>
#include <httplib.h>
#include <json.hpp>

namespace fabsearch {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile:
    case ErrorCode::EmptyMesh:
    case ErrorCode::SchemaError:
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidParams:
      return 400;
    case ErrorCode::UnknownPart: return 404;
    case ErrorCode::PayloadTooLarge: return 413;
    default: return 500;
  }
}

namespace {

HttpReply failure(ErrorCode code, std::string_view message) {
  return {http_status(code), error_to_json(to_string(code), message)};
}

template <class F>
HttpReply guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return failure(e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return failure(ErrorCode::SchemaError, e.what());
  } catch (const std::exception& e) {
    return {500, error_to_json("Internal", e.what())};
  }
}

}  // namespace

HttpReply handle_query(const SearchEngine& engine, std::string_view body, std::size_t max_mesh_bytes) {
  return guarded([&] {
    const QueryRequest req = parse_query_request(body);
    return HttpReply{200, response_to_json(engine.query(req, max_mesh_bytes), req.include_timing)};
  });
}

HttpReply handle_part(const SearchEngine& engine, std::string_view part_id) {
  return guarded([&] {
    const auto id = parse_part_id(part_id);
    if (!id) return failure(ErrorCode::UnknownPart, "no part " + std::string(part_id));
    return HttpReply{200, part_to_json(engine.repository().get(*id))};
  });
}

HttpReply handle_manufacturers(const SearchEngine& engine) {
  return guarded([&] { return HttpReply{200, manufacturers_to_json(engine.manufacturers())}; });
}

HttpReply handle_health(const SearchEngine& engine) {
  return {200, nlohmann::ordered_json{{"status", "ok"}, {"parts", engine.repository().size()}}.dump()};
}

HttpService::HttpService(const SearchEngine& engine, std::size_t max_mesh_bytes)
    : server_(std::make_unique<httplib::Server>()) {
  auto send = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  // Let the handler produce the 413 body; httplib's own limit sits above it.
  server_->set_payload_max_length(max_mesh_bytes / 3 * 4 + (1u << 20));
  // Requests httplib refuses itself (oversized body, unknown route) still get a JSON error body.
  server_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const bool too_large = res.status == 413;
    res.set_content(error_to_json(too_large ? "PayloadTooLarge" : res.status == 404 ? "NotFound" : "BadRequest",
                                  too_large ? "request body exceeds the upload cap" : httplib::status_message(res.status)),
                    "application/json; charset=utf-8");
  });
  server_->Post("/v1/query", [&engine, max_mesh_bytes, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_query(engine, req.body, max_mesh_bytes));
  });
  server_->Get(R"(/v1/parts/([^/]+))", [&engine, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_part(engine, req.matches[1].str()));
  });
  server_->Get("/v1/manufacturers", [&engine, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_manufacturers(engine));
  });
  server_->Get("/v1/health", [&engine, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_health(engine));
  });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpService::listen() { server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_->is_running()) server_->stop();
}

std::pair<std::string, int> parse_bind_address(std::string_view text) {
  std::string host = "127.0.0.1";
  std::string_view port_text = text;
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  int port = -1;
  auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || end != port_text.data() + port_text.size() || port < 0 || port > 65535)
    throw Error(ErrorCode::InvalidParams, "bad bind address " + std::string(text));
  return {host, port};
}

}  // namespace fabsearch
