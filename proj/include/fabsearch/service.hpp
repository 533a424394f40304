#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "fabsearch/engine.hpp"
#include "fabsearch/error.hpp"

namespace httplib {
class Server;
}

namespace fabsearch {

struct HttpReply {
  int status = 200;
  std::string body;
};

/// 400 for request problems, 404 UnknownPart, 413 PayloadTooLarge, 500 otherwise.
int http_status(ErrorCode code);

// Route handlers, independent of the transport.
HttpReply handle_query(const SearchEngine& engine, std::string_view body, std::size_t max_mesh_bytes);
HttpReply handle_part(const SearchEngine& engine, std::string_view part_id);
HttpReply handle_manufacturers(const SearchEngine& engine);
HttpReply handle_health(const SearchEngine& engine);

/// JSON service over one engine. The engine must outlive the service.
class HttpService {
 public:
  HttpService(const SearchEngine& engine, std::size_t max_mesh_bytes);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Port 0 picks a free port. Returns the bound port. Throws IoError.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
};

/// "host:port" or ":port" or "port". Throws InvalidParams.
std::pair<std::string, int> parse_bind_address(std::string_view text);

}  // namespace fabsearch
