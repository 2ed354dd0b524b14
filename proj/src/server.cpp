#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <condition_variable>
#include <cerrno>
#include <cstring>
#include <istream>
#include <list>
#include <mutex>
#include <ostream>
#include <thread>

#include "edvrp/error.hpp"
#include "edvrp/protocol.hpp"

namespace edvrp {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw Error(ErrorCode::Io, what + ": " + std::strerror(errno));
}

bool write_all(int fd, const char* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

// Reads one '\n'-terminated line into `line`, buffering the remainder.
// Returns false on EOF or error.
bool read_line(int fd, std::string& buffer, std::string& line) {
  for (;;) {
    const auto pos = buffer.find('\n');
    if (pos != std::string::npos) {
      line.assign(buffer, 0, pos);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      buffer.erase(0, pos + 1);
      return true;
    }
    char chunk[65536];
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

int connect_to(const std::string& endpoint) {
  const auto [host, port] = parse_endpoint(endpoint);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0) {
    throw Error(ErrorCode::Io, "cannot resolve " + endpoint);
  }
  int fd = -1;
  for (addrinfo* p = res; p; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw_errno("cannot connect to " + endpoint);
  set_nodelay(fd);
  return fd;
}

}  // namespace

std::pair<std::string, int> parse_endpoint(const std::string& endpoint) {
  std::string host = "127.0.0.1";
  std::string port = endpoint;
  if (const auto colon = endpoint.rfind(':'); colon != std::string::npos) {
    if (colon > 0) host = endpoint.substr(0, colon);
    port = endpoint.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range(port);
    return {host, p};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidSpec, "bad endpoint '" + endpoint + "', expected host:port");
  }
}

struct Server::Impl {
  LineHandler handler;
  std::string endpoint;
  int listen_fd = -1;
  std::atomic<bool> stopping{false};
  std::thread acceptor;
  std::mutex mutex;
  std::condition_variable stopped;
  std::list<std::thread> workers;
  std::list<int> clients;

  void serve_client(int fd) {
    std::string buffer;
    std::string line;
    while (!stopping && read_line(fd, buffer, line)) {
      if (line.empty()) continue;
      std::string reply = handler(line);
      reply.push_back('\n');
      if (!write_all(fd, reply.data(), reply.size())) break;
    }
    std::lock_guard lock(mutex);
    clients.remove(fd);
    ::close(fd);
  }

  void accept_loop() {
    while (!stopping) {
      pollfd p{listen_fd, POLLIN, 0};
      const int ready = ::poll(&p, 1, 100);
      if (ready <= 0) continue;
      const int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) continue;
      set_nodelay(fd);
      std::lock_guard lock(mutex);
      clients.push_back(fd);
      workers.emplace_back([this, fd] { serve_client(fd); });
    }
  }
};

Server::Server(LineHandler handler, const std::string& endpoint) : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  impl_->endpoint = endpoint;
}

Server::Server(std::shared_ptr<EnvService> service, const std::string& endpoint)
    : Server([service](const std::string& line) { return service->handle(line); }, endpoint) {}

Server::~Server() { stop(); }

int Server::start() {
  const auto [host, port] = parse_endpoint(impl_->endpoint);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  const std::string bind_host = host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw Error(ErrorCode::InvalidSpec, "listen address must be an IPv4 address: " + host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 128) != 0) {
    const int saved = errno;
    ::close(fd);
    errno = saved;
    throw_errno("cannot listen on " + impl_->endpoint);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  impl_->listen_fd = fd;
  impl_->acceptor = std::thread([this] { impl_->accept_loop(); });
  return ntohs(addr.sin_port);
}

void Server::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped.wait(lock, [this] { return impl_->stopping.load(); });
}

void Server::stop() {
  if (!impl_ || impl_->listen_fd < 0) return;
  {
    std::lock_guard lock(impl_->mutex);
    impl_->stopping = true;
    for (int fd : impl_->clients) ::shutdown(fd, SHUT_RDWR);
  }
  impl_->stopped.notify_all();
  if (impl_->acceptor.joinable()) impl_->acceptor.join();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(impl_->mutex);
    workers.swap(impl_->workers);
  }
  for (auto& w : workers) w.join();
  ::close(impl_->listen_fd);
  impl_->listen_fd = -1;
}

void serve_stream(EnvService& service, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << service.handle(line) << '\n';
    out.flush();
  }
}

LineClient::LineClient(const std::string& endpoint) : fd_(connect_to(endpoint)) {}

LineClient::~LineClient() {
  if (fd_ >= 0) ::close(fd_);
}

void LineClient::send(const std::string& line) {
  std::string framed = line;
  framed.push_back('\n');
  if (!write_all(fd_, framed.data(), framed.size())) throw_errno("send");
}

std::string LineClient::receive() {
  std::string line;
  if (!read_line(fd_, buffer_, line)) throw Error(ErrorCode::Io, "connection closed by peer");
  return line;
}

Json LineClient::request(const Json& message) {
  const std::string reply = request(message.dump());
  try {
    return Json::parse(reply);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Protocol, std::string("malformed reply: ") + e.what());
  }
}

Policy remote_policy(std::shared_ptr<LineClient> client, std::string episode) {
  return [client = std::move(client), episode = std::move(episode)](const Environment& env) {
    Json request;
    request["v"] = kProtocolVersion;
    request["type"] = "act";
    request["episode"] = episode;
    request["step"] = env.state().steps;
    request["current_vehicle"] = env.state().current_vehicle;
    request["mask"] = mask_to_json(env.mask());
    const auto& plan = env.state().plan.actions;
    request["last_action"] =
        plan.empty() ? Json(nullptr) : Json::array({plan.back().node, plan.back().entrance});
    if (env.state().steps == 0) request["graph"] = graph_tensors(env.scenario());
    const Json reply = client->request(request);
    if (!reply.value("ok", false)) {
      const std::string message = reply.contains("error") ? reply["error"].dump() : reply.dump();
      throw Error(ErrorCode::Protocol, "policy refused to act: " + message);
    }
    if (auto it = reply.find("action_index"); it != reply.end()) return env.action_at(it->get<int>());
    const Json& a = reply.at("action");
    return Action{a.at(0).get<int>(), a.at(1).get<int>()};
  };
}

}  // namespace edvrp
