/*
 * Copyright 2026 dlpim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Subscription protocol flows: how each delivered packet mutates the
// subscription tables, reserved slots and home images. Mutations happen at
// service time; the array latency only delays the outgoing consequence.

#include "dlpim/engine.hpp"

namespace dlpim {

void Simulator::set_entry_state(SubEntry& e, SubState s) {
  if (is_pending(e.state)) --pending_entries_;
  if (is_pending(s)) ++pending_entries_;
  e.state = s;
}

void Simulator::release_entry(VaultState& v, SubEntry& e) {
  if (is_pending(e.state)) --pending_entries_;
  v.slots[e.slot] = ReservedSlot{};
  v.table.release(e);
}

void Simulator::count_serve(const VaultState& v) {
  if (warmup_done_) ++vault_serves_[v.id];
}

void Simulator::send_nack(VaultState& v, BlockAddr addr, VaultId requester) {
  Packet n = make_packet(RequestKind::SubscriptionNack, v.id, requester, addr, 1);
  n.requester = requester;
  send_packet(std::move(n));
}

void Simulator::commit_write(VaultState& v, BlockAddr addr, uint64_t write_id,
                             bool to_slot, uint32_t slot) {
  if (to_slot) {
    ReservedSlot& s = v.slots[slot];
    s.payload = apply_write(s.payload, write_id);
    s.dirty = true;
  } else {
    v.home[addr] = apply_write(v.home_payload(addr), write_id);
  }
  if (cfg_.commit_log) commit_log_.push_back({addr, write_id});
}

void Simulator::settle_addr(VaultState& v, BlockAddr addr) {
  const auto it = v.parked.find(addr);
  if (it == v.parked.end()) return;
  for (ServiceItem& item : it->second) {
    --v.parked_count;
    v.enqueue_service(std::move(item.pkt), item.arrival);
  }
  v.parked.erase(it);
}

void Simulator::close_tenure(VaultState& v, const SubEntry& entry) {
  const auto it = v.tenures.find(v.table.entry_index(entry));
  if (it == v.tenures.end()) return;
  ++reuse_tenures_;
  reuse_local_ += it->second.local;
  reuse_remote_ += it->second.remote;
  v.tenures.erase(it);
}

void Simulator::apply_effect(const Effect& e) {
  switch (e.kind) {
    case EffectKind::Inject: {
      send_packet(e.pkt);
      break;
    }
    case EffectKind::Complete: {
      Packet pkt = e.pkt;
      complete_request(pkt, cycle_);
      // Requests served by the requester's own vault have no reply packet,
      // so the core unblocks here.
      if (pkt.requester == pkt.served_by) release_core(pkt.request_id);
      break;
    }
    case EffectKind::StoreSubData: {
      store_sub_data(*vaults_[e.vault], e.pkt);
      break;
    }
    case EffectKind::CentralBroadcast: {
      const uint64_t epoch = e.pkt.payload;
      const bool on = central_.decide(epoch, central_on_);
      central_broadcast(on, epoch + 1);
      break;
    }
  }
}

void Simulator::dispatch_service(VaultState& v, ServiceItem item) {
  Packet& pkt = item.pkt;
  switch (pkt.kind) {
    case RequestKind::MemRead:
    case RequestKind::MemWrite:
      serve_memory_request(v, std::move(pkt));
      return;
    case RequestKind::MemReadReply:
      complete_request(pkt, cycle_);
      release_core(pkt.request_id);
      return;
    case RequestKind::MemWriteAck:
      release_core(pkt.request_id);
      return;
    case RequestKind::SubscriptionRequest:
      handle_subscription_request(v, std::move(pkt));
      return;
    case RequestKind::SubscriptionNack:
      handle_nack(v, std::move(pkt));
      return;
    case RequestKind::SubscriptionDataTransfer:
      handle_sub_data(v, std::move(pkt));
      return;
    case RequestKind::SubscriptionTransferAck:
      handle_transfer_ack(v, std::move(pkt));
      return;
    case RequestKind::UnsubscriptionRequest:
      handle_unsub_request(v, std::move(pkt));
      return;
    case RequestKind::UnsubscriptionTransferAck:
      handle_unsub_return_or_ack(v, std::move(pkt));
      return;
    case RequestKind::TurnOnSubscription:
      v.subscribe_on = true;
      return;
    case RequestKind::TurnOffSubscription:
      v.subscribe_on = false;
      return;
    case RequestKind::PolicyStatsReport: {
      if (v.id != topo_.central_vault())
        throw SimError("policy report delivered to a non-central vault");
      central_.absorb_report(pkt.report);
      if (central_.reports_in() == topo_.vault_count()) {
        Packet ctx;
        ctx.payload = last_emitted_epoch_;
        schedule(cfg_.central_decision_latency, EffectKind::CentralBroadcast,
                 v.id, std::move(ctx));
      }
      return;
    }
  }
}

void Simulator::serve_memory_request(VaultState& v, Packet pkt) {
  const BlockAddr addr = pkt.addr;
  const VaultId home = home_vault(addr);
  const bool is_read = pkt.kind == RequestKind::MemRead;
  SubEntry* e = v.table.find(addr);

  // Holder-side serve: the block lives in this vault's reserved space.
  if (e != nullptr && home != v.id) {
    if (e->state == SubState::Subscribed) {
      e->touch(cycle_);
      count_serve(v);
      ReservedSlot& slot = v.slots[e->slot];
      auto& tenure = v.tenures[v.table.entry_index(*e)];
      if (pkt.requester == v.id) ++tenure.local; else ++tenure.remote;
      record_serve_feedback(v, addr, pkt.requester);
      pkt.served_by = v.id;
      pkt.tally.array += cfg_.t_array;
      if (is_read) {
        pkt.payload = slot.payload;
        if (pkt.requester == v.id) {
          schedule(cfg_.t_array, EffectKind::Complete, v.id, std::move(pkt));
        } else {
          Packet reply = pkt;
          reply.kind = RequestKind::MemReadReply;
          reply.flits = cfg_.data_flits();
          reply.from = v.id;
          reply.to = pkt.requester;
          schedule(cfg_.t_array, EffectKind::Inject, v.id, std::move(reply));
        }
      } else {
        commit_write(v, addr, pkt.write_id, true, e->slot);
        if (cfg_.write_ack == WriteAckMode::AfterCommit && pkt.requester != v.id) {
          Packet ack = make_packet(RequestKind::MemWriteAck, v.id, pkt.requester, addr, 1);
          ack.request_id = pkt.request_id;
          ack.served_by = v.id;
          schedule(cfg_.t_array, EffectKind::Inject, v.id, std::move(ack));
        }
        schedule(cfg_.t_array, EffectKind::Complete, v.id, std::move(pkt));
      }
      return;
    }
    if (e->state != SubState::Unsubscribed) {
      // Mid-transition: wait until it settles, then replay.
      v.park(std::move(pkt), cycle_);
      return;
    }
  }

  if (home == v.id) {
    if (e == nullptr || e->state == SubState::Unsubscribed) {
      count_serve(v);
      pkt.served_by = v.id;
      pkt.tally.array += cfg_.t_array;
      if (is_read) {
        pkt.payload = v.home_payload(addr);
        if (pkt.requester == v.id) {
          schedule(cfg_.t_array, EffectKind::Complete, v.id, std::move(pkt));
        } else {
          Packet reply = pkt;
          reply.kind = RequestKind::MemReadReply;
          reply.flits = cfg_.data_flits();
          reply.from = v.id;
          reply.to = pkt.requester;
          schedule(cfg_.t_array, EffectKind::Inject, v.id, std::move(reply));
        }
      } else {
        commit_write(v, addr, pkt.write_id, false, 0);
        if (pkt.requester != v.id) {
          Packet ack = make_packet(RequestKind::MemWriteAck, v.id, pkt.requester, addr, 1);
          ack.request_id = pkt.request_id;
          ack.served_by = v.id;
          schedule(cfg_.t_array, EffectKind::Inject, v.id, std::move(ack));
        }
        schedule(cfg_.t_array, EffectKind::Complete, v.id, std::move(pkt));
      }
      return;
    }
    if (e->state == SubState::Subscribed) {
      // Redirect to the current holder; the lookup itself costs no array
      // time. Writes are acknowledged once the forward has left.
      e->touch(cycle_);
      const VaultId holder = e->current_vault;
      if (!is_read && cfg_.write_ack == WriteAckMode::AfterForwardSent) {
        if (pkt.requester == v.id) {
          release_core(pkt.request_id);
        } else {
          Packet ack = make_packet(RequestKind::MemWriteAck, v.id, pkt.requester, addr, 1);
          ack.request_id = pkt.request_id;
          ack.served_by = holder;
          send_packet(std::move(ack));
        }
      }
      pkt.from = v.id;
      pkt.to = holder;
      send_packet(std::move(pkt));
      return;
    }
    v.park(std::move(pkt), cycle_);
    return;
  }

  // Not home and not holding it (stale forward after an unsubscription):
  // bounce back toward the home vault.
  pkt.from = v.id;
  pkt.to = home;
  send_packet(std::move(pkt));
}

void Simulator::try_subscribe(VaultState& v, BlockAddr addr, Op /*op*/) {
  if (v.table.find(addr) != nullptr) return;   // already engaged
  if (v.buffer.contains(addr)) return;         // attempt already queued
  const VaultId home = home_vault(addr);
  SubEntry* e = v.table.allocate(addr, cycle_);
  if (e != nullptr) {
    set_entry_state(*e, SubState::PendingSubscription);
    e->current_vault = v.id;
    ++subs_attempted_;
    Packet req = make_packet(RequestKind::SubscriptionRequest, v.id, home, addr, 1);
    req.requester = v.id;
    send_packet(std::move(req));
    return;
  }
  if (!v.buffer.full()) {
    v.buffer.push({v.id, home, addr, cycle_, false});
    ++subs_attempted_;
  }
  // Buffer full: give up, the access itself proceeds unsubscribed.
}

void Simulator::handle_subscription_request(VaultState& v, Packet pkt) {
  const BlockAddr addr = pkt.addr;
  const VaultId requester = pkt.requester;
  SubEntry* e = v.table.find(addr);

  if (home_vault(addr) == v.id) {
    if (requester == v.id)
      throw SimError("subscription request from the home vault must convert");
    if (e != nullptr && e->state == SubState::Subscribed) {
      // Resubscription: hand the request to the current holder. Until the
      // move concludes this vault parks traffic for the block.
      ++resubscriptions_;
      e->touch(cycle_);
      set_entry_state(*e, SubState::PendingResubscription);
      e->resub_target = requester;
      pkt.from = v.id;
      pkt.to = e->current_vault;
      send_packet(std::move(pkt));
      return;
    }
    if (e != nullptr) {  // some transition already in flight
      send_nack(v, addr, requester);
      return;
    }
    if (v.buffer.contains(addr)) {  // a previous request is already waiting
      send_nack(v, addr, requester);
      return;
    }
    SubEntry* home_entry = v.table.allocate(addr, cycle_);
    if (home_entry != nullptr) {
      set_entry_state(*home_entry, SubState::PendingSubscription);
      home_entry->current_vault = requester;
      Packet xfer = make_packet(RequestKind::SubscriptionDataTransfer, v.id,
                                requester, addr, cfg_.data_flits());
      xfer.requester = requester;
      xfer.payload = v.home_payload(addr);
      xfer.dirty = false;
      schedule(cfg_.t_array, EffectKind::Inject, v.id, std::move(xfer));
      return;
    }
    if (!v.buffer.full()) {
      v.buffer.push({requester, v.id, addr, cycle_, true});
      return;
    }
    send_nack(v, addr, requester);
    return;
  }

  // Redirected resubscription arriving at the holder.
  if (e != nullptr && e->state == SubState::Subscribed) {
    e->touch(cycle_);
    set_entry_state(*e, SubState::PendingResubscription);
    e->resub_target = requester;
    ReservedSlot& slot = v.slots[e->slot];
    Packet xfer = make_packet(RequestKind::SubscriptionDataTransfer, v.id,
                              requester, addr, cfg_.data_flits());
    xfer.requester = requester;
    xfer.payload = slot.payload;
    xfer.dirty = slot.dirty;
    schedule(cfg_.t_array, EffectKind::Inject, v.id, std::move(xfer));
    return;
  }
  // Holder is mid-transition (or already let the block go): refuse through
  // the original so it can restore its entry and notify the requester.
  Packet n = make_packet(RequestKind::SubscriptionNack, v.id, home_vault(addr), addr, 1);
  n.requester = requester;
  send_packet(std::move(n));
}

void Simulator::handle_nack(VaultState& v, Packet pkt) {
  const BlockAddr addr = pkt.addr;
  if (home_vault(addr) == v.id) {
    // A holder refused a redirect; roll the entry back and pass the refusal
    // on to the requester.
    SubEntry* e = v.table.find(addr);
    if (e != nullptr && e->state == SubState::PendingResubscription &&
        e->resub_target == pkt.requester) {
      set_entry_state(*e, SubState::Subscribed);
      e->resub_target = kNoVault;
      settle_addr(v, addr);
    }
    pkt.from = v.id;
    pkt.to = pkt.requester;
    send_packet(std::move(pkt));
    return;
  }
  // Requester side: roll back the pending entry and free any buffered
  // attempt for this block.
  SubEntry* e = v.table.find(addr);
  if (e == nullptr || e->state != SubState::PendingSubscription)
    throw SimError("NACK for a block with no pending subscription");
  release_entry(v, *e);
  v.buffer.drop(addr);
  ++subs_nacked_;
  settle_addr(v, addr);
}

void Simulator::handle_sub_data(VaultState& v, Packet pkt) {
  const SubEntry* e = v.table.find(pkt.addr);
  if (e == nullptr || e->state != SubState::PendingSubscription)
    throw SimError("subscription data arrived without a pending entry");
  // The entry flips to Subscribed together with the outgoing acks, after the
  // reserved-space write; that keeps any immediate eviction behind the
  // handshake on the path back to the home vault.
  schedule(cfg_.t_array, EffectKind::StoreSubData, v.id, std::move(pkt));
}

void Simulator::store_sub_data(VaultState& v, const Packet& pkt) {
  const BlockAddr addr = pkt.addr;
  SubEntry* e = v.table.find(addr);
  if (e == nullptr || e->state != SubState::PendingSubscription)
    throw SimError("pending subscription vanished during the slot write");

  ReservedSlot& slot = v.slots[e->slot];
  slot.valid = true;
  slot.dirty = pkt.dirty;  // resubscribed blocks keep their dirty state
  slot.payload = pkt.payload;
  slot.orig_addr = addr;
  set_entry_state(*e, SubState::Subscribed);
  e->current_vault = v.id;
  e->touch(cycle_);
  v.tenures[v.table.entry_index(*e)] = ReuseTenure{};
  ++subs_completed_;

  // Moving the block here cost a full data transfer; charge it so zero-reuse
  // subscriptions read as a loss.
  v.registers.add_feedback(class_of(addr), -1);

  const VaultId home = home_vault(addr);
  send_packet(make_packet(RequestKind::SubscriptionTransferAck, v.id, home, addr, 1));
  if (pkt.from != home) {
    // Resubscription: the old holder gets its own acknowledgement and can
    // drop its copy.
    send_packet(make_packet(RequestKind::SubscriptionTransferAck, v.id, pkt.from, addr, 1));
  }
  settle_addr(v, addr);
}

void Simulator::handle_transfer_ack(VaultState& v, Packet pkt) {
  const BlockAddr addr = pkt.addr;
  SubEntry* e = v.table.find(addr);
  if (home_vault(addr) == v.id) {
    if (e == nullptr || (e->state != SubState::PendingSubscription &&
                         e->state != SubState::PendingResubscription))
      throw SimError("transfer ack at home without a matching pending entry");
    set_entry_state(*e, SubState::Subscribed);
    e->current_vault = pkt.from;
    e->resub_target = kNoVault;
    settle_addr(v, addr);
    return;
  }
  // Old holder after a resubscription: the block lives elsewhere now. The
  // dirty state traveled with the data, so the copy is dropped without a
  // writeback.
  if (e == nullptr || e->state != SubState::PendingResubscription)
    throw SimError("transfer ack at holder without a resubscribing entry");
  close_tenure(v, *e);
  release_entry(v, *e);
  settle_addr(v, addr);
}

void Simulator::handle_unsub_request(VaultState& v, Packet pkt) {
  const BlockAddr addr = pkt.addr;
  SubEntry* e = v.table.find(addr);
  if (e == nullptr || e->state == SubState::Unsubscribed) return;  // stale
  switch (e->state) {
    case SubState::Subscribed: {
      set_entry_state(*e, SubState::PendingUnsubscription);
      const ReservedSlot& slot = v.slots[e->slot];
      Packet ret = make_packet(RequestKind::UnsubscriptionTransferAck, v.id,
                               home_vault(addr), addr,
                               slot.dirty ? cfg_.data_flits() : 1);
      ret.dirty = slot.dirty;
      ret.payload = slot.payload;
      schedule(slot.dirty ? cfg_.t_array : 0, EffectKind::Inject, v.id, std::move(ret));
      return;
    }
    case SubState::PendingUnsubscription:
      return;  // both sides initiated; the return is already in flight
    default:
      throw SimError("unsubscription request while holder is mid-subscription");
  }
}

void Simulator::handle_unsub_return_or_ack(VaultState& v, Packet pkt) {
  const BlockAddr addr = pkt.addr;
  SubEntry* e = v.table.find(addr);
  if (home_vault(addr) == v.id) {
    // The returning block (data when dirty, bare ack when clean).
    if (e == nullptr)
      throw SimError("unsubscription return for an unknown entry");
    if (pkt.dirty) v.home[addr] = pkt.payload;
    release_entry(v, *e);
    ++unsubscriptions_;
    Packet fin = make_packet(RequestKind::UnsubscriptionTransferAck, v.id,
                             pkt.from, addr, 1);
    schedule(pkt.dirty ? cfg_.t_array : 0, EffectKind::Inject, v.id, std::move(fin));
    settle_addr(v, addr);
    return;
  }
  // Final acknowledgement at the former holder.
  if (e == nullptr || e->state != SubState::PendingUnsubscription)
    throw SimError("final unsubscription ack without a returning entry");
  close_tenure(v, *e);
  release_entry(v, *e);
  settle_addr(v, addr);
}

void Simulator::start_unsubscription(VaultState& v, SubEntry& entry) {
  if (entry.state != SubState::Subscribed) return;
  if (home_vault(entry.addr) == v.id) {
    // Original-initiated: ask the holder to send the block back.
    set_entry_state(entry, SubState::PendingUnsubscription);
    Packet req = make_packet(RequestKind::UnsubscriptionRequest, v.id,
                             entry.current_vault, entry.addr, 1);
    send_packet(std::move(req));
    return;
  }
  // Holder-initiated (eviction): return data if dirty, otherwise just the
  // acknowledgement since the home copy still matches.
  set_entry_state(entry, SubState::PendingUnsubscription);
  const ReservedSlot& slot = v.slots[entry.slot];
  Packet ret = make_packet(RequestKind::UnsubscriptionTransferAck, v.id,
                           home_vault(entry.addr), entry.addr,
                           slot.dirty ? cfg_.data_flits() : 1);
  ret.dirty = slot.dirty;
  ret.payload = slot.payload;
  schedule(slot.dirty ? cfg_.t_array : 0, EffectKind::Inject, v.id, std::move(ret));
}

void Simulator::buffer_scan(VaultState& v) {
  // One buffered subscription action per vault per cycle: activate the
  // oldest request whose set now has room, or start carving room for it.
  const auto& entries = v.buffer.entries();
  for (size_t i = 0; i < entries.size(); ++i) {
    const SubBufferEntry& be = entries[i];
    const uint32_t set = v.table.set_of(be.addr);
    if (v.table.live_count(set) < v.table.ways()) {
      const SubBufferEntry taken = v.buffer.take(i);
      SubEntry* e = v.table.allocate(taken.addr, cycle_);
      if (e == nullptr) throw SimError("buffer scan lost its free way");
      set_entry_state(*e, SubState::PendingSubscription);
      if (taken.at_original) {
        // Deferred grant: this vault is the block's home, the requester has
        // been waiting for table space here.
        e->current_vault = taken.from_vault;
        Packet xfer = make_packet(RequestKind::SubscriptionDataTransfer, v.id,
                                  taken.from_vault, taken.addr, cfg_.data_flits());
        xfer.requester = taken.from_vault;
        xfer.payload = v.home_payload(taken.addr);
        schedule(cfg_.t_array, EffectKind::Inject, v.id, std::move(xfer));
      } else {
        e->current_vault = v.id;
        Packet req = make_packet(RequestKind::SubscriptionRequest, v.id,
                                 taken.to_vault, taken.addr, 1);
        req.requester = v.id;
        send_packet(std::move(req));
      }
      return;
    }
    if (!v.table.eviction_in_progress(set)) {
      SubEntry* victim = v.table.pick_victim(set);
      if (victim != nullptr) {
        start_unsubscription(v, *victim);
        return;
      }
      // All ways pending: the buffered request stays parked for now.
    }
  }
}

}  // namespace dlpim
