// Eigen first: httplib pulls in <resolv.h>, whose `_res` macro breaks Eigen.
#include "fts/error.hpp"
#include "fts/timeseries.hpp"

#include <httplib.h>

namespace fts {

std::string fetch_prices(const std::string& url, std::chrono::seconds timeout) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::network_error, "not an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string base = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(base);
  if (!client.is_valid()) throw Error(Errc::network_error, "unsupported URL: " + url);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_follow_location(true);

  auto result = client.Get(path);
  if (!result) {
    const auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout) throw Error(Errc::timeout, "connection to " + base + " timed out");
    if (err == httplib::Error::Read) throw Error(Errc::timeout, "reading from " + base + " failed or timed out");
    throw Error(Errc::network_error, httplib::to_string(err) + " (" + base + ")");
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(Errc::http_status, "GET " + url + " returned " + std::to_string(result->status), result->status);
  }
  return result->body;
}

}  // namespace fts
