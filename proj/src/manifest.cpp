#include "aggpi/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>

#ifndef AGGPI_VERSION
#define AGGPI_VERSION "0.0.0"
#endif

namespace aggpi {

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::string hex;
    hex.reserve(2 * len);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string config_digest(const config::Json& effective_config)
{
    return sha256_hex(config::canonical(effective_config));
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string tool_version() { return AGGPI_VERSION; }

config::Json to_json(const RunManifest& m)
{
    return config::Json{{"command", m.command},
                        {"config_digest", m.config_digest},
                        {"rng_seed", m.rng_seed},
                        {"tool_version", m.tool_version},
                        {"started", m.started},
                        {"finished", m.finished},
                        {"outputs", m.outputs}};
}

}  // namespace aggpi
