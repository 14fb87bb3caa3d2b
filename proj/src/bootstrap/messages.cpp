#include "meshbed/bootstrap/messages.hpp"

namespace meshbed::boot {

namespace {

std::optional<NetworkAddress> addr_field(const FieldRecord& rec, std::string_view key) {
    const auto raw = rec.get(key);
    if (!raw) {
        return std::nullopt;
    }
    return NetworkAddress::parse(*raw);
}

void put_md(FieldRecord& rec, const ServiceMetadata& md) {
    rec.set_u64("servMD.agent_count", md.agent_count);
    rec.set_u64("servMD.device_count", md.device_count);
    for (const auto& loc : md.locations) {
        rec.set("servMD.locations", loc);
    }
    for (const auto& [k, v] : md.params) {
        rec.set("servMD.params." + k, v);
    }
}

std::optional<ServiceMetadata> md_from(const FieldRecord& rec) {
    ServiceMetadata md;
    const auto agents = rec.get_u64("servMD.agent_count");
    const auto devices = rec.get_u64("servMD.device_count");
    if (!agents || !devices) {
        return std::nullopt;
    }
    md.agent_count = *agents;
    md.device_count = *devices;
    md.locations = rec.get_all("servMD.locations");
    constexpr std::string_view prefix = "servMD.params.";
    for (const auto& [k, v] : rec.entries()) {
        if (k.size() > prefix.size() && std::string_view(k).substr(0, prefix.size()) == prefix) {
            md.params.emplace_back(k.substr(prefix.size()), v);
        }
    }
    return md;
}

} // namespace

std::optional<std::string> ServiceMetadata::param(std::string_view key) const {
    for (const auto& [k, v] : params) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

std::optional<std::uint64_t> ServiceMetadata::param_u64(std::string_view key) const {
    const auto v = param(key);
    if (!v) return std::nullopt;
    return parse_u64(*v);
}

std::optional<double> ServiceMetadata::param_f64(std::string_view key) const {
    const auto v = param(key);
    if (!v) return std::nullopt;
    return parse_double(*v);
}

void ServiceMetadata::set_param(std::string_view key, std::string_view value) {
    for (auto& [k, v] : params) {
        if (k == key) {
            v = std::string(value);
            return;
        }
    }
    params.emplace_back(std::string(key), std::string(value));
}

std::string broadcast_body(const NetworkAddress& gw_addr, const std::string& serv_info) {
    FieldRecord rec;
    rec.set("GWAddr", gw_addr.to_string());
    rec.set("servInfo", serv_info);
    return rec.encode();
}

std::string reg_dev_body(const DeviceRegistration& reg) {
    FieldRecord rec;
    rec.set("devAddr", reg.dev_addr.to_string());
    rec.set("devInfo.device_type", reg.dev_info.device_type);
    rec.set("devInfo.location", reg.dev_info.location);
    rec.set("servInfo", reg.serv_info);
    return rec.encode();
}

std::string asgn_agn_body(const NetworkAddress& agn_addr) {
    FieldRecord rec;
    rec.set("agnAddr", agn_addr.to_string());
    return rec.encode();
}

std::string serv_req_body(const ServiceRequest& req) {
    FieldRecord rec;
    rec.set("servInfo", req.serv_info);
    put_md(rec, req.serv_md);
    return rec.encode();
}

std::string ready_body(const std::string& serv_info, const ServiceMetadata& md) {
    FieldRecord rec;
    rec.set("servInfo", serv_info);
    put_md(rec, md);
    return rec.encode();
}

std::string agn_ready_body(const NetworkAddress& agn_addr, const std::string& serv_info) {
    FieldRecord rec;
    rec.set("agnAddr", agn_addr.to_string());
    rec.set("servInfo", serv_info);
    return rec.encode();
}

std::string run_serv_body(const std::string& serv_info) {
    FieldRecord rec;
    rec.set("servInfo", serv_info);
    return rec.encode();
}

std::string sensing_body(const std::string& serv_info, const std::string& data) {
    FieldRecord rec;
    rec.set("servInfo", serv_info);
    rec.set("data", data);
    return rec.encode();
}

std::string actuation_body(const std::string& serv_info, const std::string& actuation) {
    FieldRecord rec;
    rec.set("servInfo", serv_info);
    rec.set("actuation", actuation);
    return rec.encode();
}

std::string operator_notice_body(const std::string& serv_info, const std::string& status,
                                 const std::string& detail) {
    FieldRecord rec;
    rec.set("servInfo", serv_info);
    rec.set("status", status);
    rec.set("detail", detail);
    return rec.encode();
}

std::string dereg_dev_body(const NetworkAddress& dev_addr, const std::string& serv_info) {
    FieldRecord rec;
    rec.set("devAddr", dev_addr.to_string());
    rec.set("servInfo", serv_info);
    return rec.encode();
}

std::optional<BroadcastMsg> parse_broadcast(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto gw = addr_field(*rec, "GWAddr");
    const auto serv = rec->get("servInfo");
    if (!gw || !serv) return std::nullopt;
    return BroadcastMsg{*gw, *serv};
}

std::optional<DeviceRegistration> parse_reg_dev(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto dev = addr_field(*rec, "devAddr");
    const auto type = rec->get("devInfo.device_type");
    const auto loc = rec->get("devInfo.location");
    const auto serv = rec->get("servInfo");
    if (!dev || !type || !loc || !serv) return std::nullopt;
    return DeviceRegistration{*dev, DeviceInfo{*type, *loc}, *serv};
}

std::optional<AsgnAgnMsg> parse_asgn_agn(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto agn = addr_field(*rec, "agnAddr");
    if (!agn) return std::nullopt;
    return AsgnAgnMsg{*agn};
}

std::optional<ServiceRequest> parse_serv_req(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto serv = rec->get("servInfo");
    auto md = md_from(*rec);
    if (!serv || !md) return std::nullopt;
    return ServiceRequest{*serv, std::move(*md)};
}

std::optional<ReadyMsg> parse_ready(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto serv = rec->get("servInfo");
    auto md = md_from(*rec);
    if (!serv || !md) return std::nullopt;
    return ReadyMsg{*serv, std::move(*md)};
}

std::optional<AgnReadyMsg> parse_agn_ready(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto agn = addr_field(*rec, "agnAddr");
    const auto serv = rec->get("servInfo");
    if (!agn || !serv) return std::nullopt;
    return AgnReadyMsg{*agn, *serv};
}

std::optional<std::string> parse_run_serv(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    return rec->get("servInfo");
}

std::optional<DataMsg> parse_sensing(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto serv = rec->get("servInfo");
    const auto data = rec->get("data");
    if (!serv || !data) return std::nullopt;
    return DataMsg{*serv, *data};
}

std::optional<DataMsg> parse_actuation(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto serv = rec->get("servInfo");
    const auto act = rec->get("actuation");
    if (!serv || !act) return std::nullopt;
    return DataMsg{*serv, *act};
}

std::optional<OperatorNotice> parse_operator_notice(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto serv = rec->get("servInfo");
    const auto status = rec->get("status");
    const auto detail = rec->get("detail");
    if (!serv || !status) return std::nullopt;
    return OperatorNotice{*serv, *status, detail.value_or("")};
}

std::optional<DeregMsg> parse_dereg_dev(std::string_view body) {
    const auto rec = FieldRecord::decode(body);
    if (!rec) return std::nullopt;
    const auto dev = addr_field(*rec, "devAddr");
    const auto serv = rec->get("servInfo");
    if (!dev || !serv) return std::nullopt;
    return DeregMsg{*dev, *serv};
}

} // namespace meshbed::boot
