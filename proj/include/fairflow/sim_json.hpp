#pragma once
// JSON bindings for link configs and monitor-report traces. Field names match
// the domain types one for one. Templated over the basic_json flavour so both
// nlohmann::json and ordered_json work.

#include "json.hpp"

#include "fairflow/sim.hpp"

namespace fairflow {

template <typename BasicJson>
void to_json(BasicJson& j, const LinkConfig& link) {
  j = BasicJson{{"bandwidth_pps", link.bandwidth_pps},
                {"one_way_latency_s", link.one_way_latency_s},
                {"queue_capacity_pkts", link.queue_capacity_pkts},
                {"random_loss_rate", link.random_loss_rate},
                {"packet_size_bits", link.packet_size_bits}};
}

template <typename BasicJson>
void from_json(const BasicJson& j, LinkConfig& link) {
  j.at("bandwidth_pps").get_to(link.bandwidth_pps);
  j.at("one_way_latency_s").get_to(link.one_way_latency_s);
  j.at("queue_capacity_pkts").get_to(link.queue_capacity_pkts);
  j.at("random_loss_rate").get_to(link.random_loss_rate);
  if (j.contains("packet_size_bits")) {
    j.at("packet_size_bits").get_to(link.packet_size_bits);
  }
  link.validate();
}

template <typename BasicJson>
void to_json(BasicJson& j, const MonitorReport& r) {
  j = BasicJson{{"flow_id", r.flow_id},
                {"mi_index", r.mi_index},
                {"duration_s", r.duration_s},
                {"sent_pkts", r.sent_pkts},
                {"delivered_pkts", r.delivered_pkts},
                {"lost_pkts", r.lost_pkts},
                {"mean_latency_s", r.mean_latency_s},
                {"min_latency_s_seen_so_far", r.min_latency_s_seen_so_far},
                {"throughput_pps", r.throughput_pps},
                {"delivered_empty", r.delivered_empty}};
}

template <typename BasicJson>
void from_json(const BasicJson& j, MonitorReport& r) {
  j.at("flow_id").get_to(r.flow_id);
  j.at("mi_index").get_to(r.mi_index);
  j.at("duration_s").get_to(r.duration_s);
  j.at("sent_pkts").get_to(r.sent_pkts);
  j.at("delivered_pkts").get_to(r.delivered_pkts);
  j.at("lost_pkts").get_to(r.lost_pkts);
  j.at("mean_latency_s").get_to(r.mean_latency_s);
  j.at("min_latency_s_seen_so_far").get_to(r.min_latency_s_seen_so_far);
  j.at("throughput_pps").get_to(r.throughput_pps);
  if (j.contains("delivered_empty")) j.at("delivered_empty").get_to(r.delivered_empty);
}

}  // namespace fairflow
