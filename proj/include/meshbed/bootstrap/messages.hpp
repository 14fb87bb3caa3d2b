#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "meshbed/core/encoding.hpp"
#include "meshbed/net/address.hpp"

namespace meshbed::boot {

struct DeviceInfo {
    std::string device_type;
    std::string location;

    bool operator==(const DeviceInfo&) const = default;
};

struct DeviceRegistration {
    NetworkAddress dev_addr;
    DeviceInfo dev_info;
    std::string serv_info;

    bool operator==(const DeviceRegistration&) const = default;
};

struct ServiceMetadata {
    std::uint64_t agent_count = 0;
    std::uint64_t device_count = 0;
    std::vector<std::string> locations;
    std::vector<std::pair<std::string, std::string>> params;

    std::optional<std::string> param(std::string_view key) const;
    std::optional<std::uint64_t> param_u64(std::string_view key) const;
    std::optional<double> param_f64(std::string_view key) const;
    void set_param(std::string_view key, std::string_view value);

    bool operator==(const ServiceMetadata&) const = default;
};

struct ServiceRequest {
    std::string serv_info;
    ServiceMetadata serv_md;

    bool operator==(const ServiceRequest&) const = default;
};

// Body builders/parsers for the protocol messages. Field names are part of
// the wire contract: GWAddr, servInfo, devAddr, devInfo.*, agnAddr, servMD.*,
// data, actuation.
std::string broadcast_body(const NetworkAddress& gw_addr, const std::string& serv_info);
std::string reg_dev_body(const DeviceRegistration& reg);
std::string asgn_agn_body(const NetworkAddress& agn_addr);
std::string serv_req_body(const ServiceRequest& req);
std::string ready_body(const std::string& serv_info, const ServiceMetadata& md);
std::string agn_ready_body(const NetworkAddress& agn_addr, const std::string& serv_info);
std::string run_serv_body(const std::string& serv_info);
std::string sensing_body(const std::string& serv_info, const std::string& data);
std::string actuation_body(const std::string& serv_info, const std::string& actuation);
std::string operator_notice_body(const std::string& serv_info, const std::string& status,
                                 const std::string& detail);
std::string dereg_dev_body(const NetworkAddress& dev_addr, const std::string& serv_info);

struct BroadcastMsg {
    NetworkAddress gw_addr;
    std::string serv_info;
};
struct AsgnAgnMsg {
    NetworkAddress agn_addr;
};
struct ReadyMsg {
    std::string serv_info;
    ServiceMetadata serv_md;
};
struct AgnReadyMsg {
    NetworkAddress agn_addr;
    std::string serv_info;
};
struct DataMsg {
    std::string serv_info;
    std::string payload; // `data` or `actuation` field
};
struct OperatorNotice {
    std::string serv_info;
    std::string status;
    std::string detail;
};
struct DeregMsg {
    NetworkAddress dev_addr;
    std::string serv_info;
};

std::optional<BroadcastMsg> parse_broadcast(std::string_view body);
std::optional<DeviceRegistration> parse_reg_dev(std::string_view body);
std::optional<AsgnAgnMsg> parse_asgn_agn(std::string_view body);
std::optional<ServiceRequest> parse_serv_req(std::string_view body);
std::optional<ReadyMsg> parse_ready(std::string_view body);
std::optional<AgnReadyMsg> parse_agn_ready(std::string_view body);
std::optional<std::string> parse_run_serv(std::string_view body); // servInfo
std::optional<DataMsg> parse_sensing(std::string_view body);
std::optional<DataMsg> parse_actuation(std::string_view body);
std::optional<OperatorNotice> parse_operator_notice(std::string_view body);
std::optional<DeregMsg> parse_dereg_dev(std::string_view body);

} // namespace meshbed::boot
