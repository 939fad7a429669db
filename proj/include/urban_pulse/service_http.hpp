#pragma once

#include <httplib.h>

#include "service.hpp"

namespace urban_pulse {

/// Routes every GET/HEAD/POST on `server` through `service`. The service must
/// outlive the server.
inline void mount(httplib::Server& server, const Service& service) {
    auto handler = [&service](const httplib::Request& in, httplib::Response& out) {
        HttpRequest req;
        req.method = in.method;
        req.path = in.path;
        for (const auto& [key, value] : in.params) req.query.emplace(key, value);
        req.body = in.body;
        req.if_none_match = in.get_header_value("If-None-Match");

        const HttpResponse res = service.handle(req);
        out.status = res.status;
        if (!res.etag.empty()) out.set_header("ETag", res.etag);
        out.set_header("Access-Control-Allow-Origin", "*");
        if (res.status != 304) out.set_content(res.body, res.content_type);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);
    server.Options(".*", [](const httplib::Request&, httplib::Response& out) {
        out.set_header("Access-Control-Allow-Origin", "*");
        out.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        out.set_header("Access-Control-Allow-Headers", "Content-Type, If-None-Match");
        out.status = 204;
    });
}

} // namespace urban_pulse
