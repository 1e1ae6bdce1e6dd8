"""Mobility signaling: message types, wire framing, and node state machines.

Models the control plane of the distributed mobility scheme: mobiles attach
to mix zones, zones assign local network prefixes (LNPs), and a binding
server (LBS) tracks each mobile's serving zone plus the zones still
anchoring its previous prefixes (pLNPs). Handover-initiate/acknowledge
messages carry a D flag (distributed extension, always 1 here) and a T flag
selecting the receiver role: 0 = target mix zone, 1 = anchoring zone (RSU),
2 = reported (previous serving) zone.

The frame format is a compact abstract encoding for tests and traces, not a
standards-conformant layout:

    byte 0      version (1)
    byte 1      message kind
    byte 2      flags: bit0 = D, bits1-2 = T
    bytes 3-10  mobile id, big-endian
    byte 11     option count
    then per option: kind byte, 2-byte big-endian length, payload

Control frames report the modeled control packet size regardless of the
actual option payload so byte accounting matches the cost model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

DEFAULT_CONTROL_SIZE = 80
DEFAULT_DATA_SIZE = 400

__all__ = [
    "MessageKind", "OptionKind", "MobilityOption", "MobilityMessage",
    "FrameError", "ProtocolError", "encode", "decode",
    "BindingCacheEntry", "TunnelTable", "Node", "Mu", "MixZone", "Lbs",
    "Transmission", "initial_attach", "predictive_handover",
    "reactive_handover", "lbs_update",
]


class MessageKind(IntEnum):
    RS = 1                # router solicitation (mobile -> zone)
    RA = 2                # router advertisement (zone -> mobile)
    PBU = 3               # binding update (zone <-> server)
    PBA = 4               # binding acknowledgement
    HI = 5                # handover initiate (zone <-> zone)
    HACK = 6              # handover acknowledge
    L2_REPORT = 7         # link-layer measurement report (mobile -> zone)
    HANDOVER_COMMAND = 8  # zone -> mobile, switch order + prefix deprecation
    DATA = 9


class OptionKind(IntEnum):
    LNP = 1
    PLNP_LIST = 2
    LBS_ADDR = 3
    MU_LLA_IID = 4
    CONTEXT_REQUEST = 5
    MZ_ADDR = 6


class FrameError(ValueError):
    """Undecodable or malformed frame."""


class ProtocolError(RuntimeError):
    """State machine driven outside its contract (e.g. empty prefix pool)."""


@dataclass(frozen=True)
class MobilityOption:
    kind: OptionKind
    payload: bytes = b""


@dataclass(frozen=True)
class MobilityMessage:
    kind: MessageKind
    mu_id: int
    d_flag: int = 0
    t_flag: int | None = None
    options: tuple[MobilityOption, ...] = ()
    size: int | None = None  # modeled bytes; defaults per kind

    def __post_init__(self) -> None:
        if self.d_flag not in (0, 1):
            raise ProtocolError("d_flag must be 0 or 1")
        if self.kind in (MessageKind.HI, MessageKind.HACK):
            if self.t_flag not in (0, 1, 2):
                raise ProtocolError("HI/HACK require t_flag in {0, 1, 2}")
        elif self.t_flag is not None:
            raise ProtocolError("t_flag only valid on HI/HACK")
        kinds = [o.kind for o in self.options]
        if len(kinds) != len(set(kinds)):
            raise ProtocolError("duplicate option kind")
        if self.size is None:
            object.__setattr__(
                self, "size",
                DEFAULT_DATA_SIZE if self.kind is MessageKind.DATA
                else DEFAULT_CONTROL_SIZE)

    def option(self, kind: OptionKind) -> MobilityOption | None:
        for opt in self.options:
            if opt.kind is kind:
                return opt
        return None


def encode(msg: MobilityMessage) -> bytes:
    """Serialize to the abstract frame format."""
    if not 0 <= msg.mu_id < 2 ** 64:
        raise FrameError("mu_id out of 64-bit range")
    flags = (msg.d_flag & 1) | ((msg.t_flag or 0) << 1)
    out = bytearray((1, int(msg.kind), flags))
    out += msg.mu_id.to_bytes(8, "big")
    if len(msg.options) > 255:
        raise FrameError("too many options")
    out.append(len(msg.options))
    for opt in msg.options:
        if len(opt.payload) > 0xFFFF:
            raise FrameError("option payload too long")
        out.append(int(opt.kind))
        out += len(opt.payload).to_bytes(2, "big")
        out += opt.payload
    return bytes(out)


def decode(data: bytes, control_size: int = DEFAULT_CONTROL_SIZE,
           data_size: int = DEFAULT_DATA_SIZE) -> MobilityMessage:
    """Parse a frame produced by :func:`encode`.

    The reported message size is the modeled control/data packet size, not
    the frame length.
    """
    if len(data) < 12:
        raise FrameError("frame truncated")
    if data[0] != 1:
        raise FrameError(f"unsupported frame version {data[0]}")
    try:
        kind = MessageKind(data[1])
    except ValueError:
        raise FrameError(f"unknown message kind {data[1]}") from None
    flags = data[2]
    if flags & ~0b111:
        raise FrameError("reserved flag bits set")
    d_flag = flags & 1
    t_bits = (flags >> 1) & 0b11
    if kind in (MessageKind.HI, MessageKind.HACK):
        if t_bits == 3:
            raise FrameError("t_flag 3 is invalid")
        t_flag: int | None = t_bits
    else:
        if t_bits:
            raise FrameError("t_flag set on non-HI/HACK message")
        t_flag = None
    mu_id = int.from_bytes(data[3:11], "big")
    count = data[11]
    pos = 12
    options: list[MobilityOption] = []
    for _ in range(count):
        if pos + 3 > len(data):
            raise FrameError("option header truncated")
        try:
            okind = OptionKind(data[pos])
        except ValueError:
            raise FrameError(f"unknown option kind {data[pos]}") from None
        length = int.from_bytes(data[pos + 1:pos + 3], "big")
        pos += 3
        if pos + length > len(data):
            raise FrameError("option payload truncated")
        options.append(MobilityOption(okind, bytes(data[pos:pos + length])))
        pos += length
    if pos != len(data):
        raise FrameError("trailing bytes after options")
    size = data_size if kind is MessageKind.DATA else control_size
    try:
        return MobilityMessage(kind, mu_id, d_flag, t_flag, tuple(options),
                               size)
    except ProtocolError as exc:
        raise FrameError(str(exc)) from None


# -- node state --------------------------------------------------------------

@dataclass
class BindingCacheEntry:
    """Per-mobile mobility session record (zone side and server side)."""

    mu_id: int
    lnp: str
    serving_mz: str
    anchored: list[tuple[str, str]] = field(default_factory=list)  # (zone, prefix)
    created_at: float = 0.0
    state: str = "CONFIRMED"  # or "TEMPORAL"


@dataclass
class TunnelTable:
    """Bidirectional zone-to-zone tunnels keyed by anchored prefix."""

    entries: set[tuple[str, str, str]] = field(default_factory=set)

    def add(self, local: str, peer: str, prefix: str) -> None:
        if local == peer:
            raise ProtocolError("self-tunnel rejected")
        self.entries.add((local, peer, prefix))

    def remove_prefix(self, prefix: str) -> None:
        self.entries = {e for e in self.entries if e[2] != prefix}

    def peer_for(self, prefix: str) -> str | None:
        for _, peer, pfx in self.entries:
            if pfx == prefix:
                return peer
        return None


class Node:
    """Common node identity: a name and a role (MU, MIX_ZONE, LBS)."""

    def __init__(self, name: str, role: str) -> None:
        self.name = name
        self.role = role

    def __repr__(self) -> str:
        return f"<{self.role} {self.name}>"


class Mu(Node):
    def __init__(self, name: str, mu_id: int, ll_id: int = 0) -> None:
        super().__init__(name, "MU")
        self.mu_id = mu_id
        self.ll_id = ll_id
        self.lnp: str | None = None
        self.plnps: list[str] = []

    @property
    def addresses(self) -> list[str]:
        return ([self.lnp] if self.lnp else []) + list(self.plnps)


class MixZone(Node):
    def __init__(self, name: str, prefix_pool: list[str] | None = None) -> None:
        super().__init__(name, "MIX_ZONE")
        self.prefix_pool = list(prefix_pool or [])
        self.bces: dict[int, BindingCacheEntry] = {}
        self.tunnels = TunnelTable()
        self.routes: dict[str, str] = {}  # prefix -> next hop

    def allocate_prefix(self) -> str:
        if not self.prefix_pool:
            raise ProtocolError(f"{self.name}: prefix pool exhausted")
        return self.prefix_pool.pop(0)


class Lbs(Node):
    def __init__(self, name: str = "LBS") -> None:
        super().__init__(name, "LBS")
        self.bces: dict[int, BindingCacheEntry] = {}


@dataclass(frozen=True)
class Transmission:
    """One message on the wire: who sent it to whom."""

    message: MobilityMessage
    src: str
    dst: str

    @property
    def summary(self) -> tuple[str, str, str, int, int | None]:
        m = self.message
        return (m.kind.name, self.src, self.dst, m.d_flag, m.t_flag)


Trace = list[Transmission]


def _opt(kind: OptionKind, text: str) -> MobilityOption:
    return MobilityOption(kind, text.encode())


def _anchor_payload(anchored: list[tuple[str, str]]) -> str:
    return ";".join(f"{zone},{prefix}" for zone, prefix in anchored)


# -- operations ---------------------------------------------------------------

def initial_attach(mu: Mu, mz: MixZone, lbs: Lbs, now: float = 0.0) -> Trace:
    """First registration of a mobile: solicit, bind at the server, advertise.

    Re-running for an already bound mobile is idempotent: the same four
    messages flow and the final state is unchanged (no second prefix is
    drawn from the pool).
    """
    trace: Trace = []
    trace.append(Transmission(
        MobilityMessage(MessageKind.RS, mu.mu_id), mu.name, mz.name))
    existing = mz.bces.get(mu.mu_id)
    lnp = existing.lnp if existing else mz.allocate_prefix()
    mz.bces[mu.mu_id] = BindingCacheEntry(mu.mu_id, lnp, mz.name,
                                          created_at=now)
    mz.routes[lnp] = mu.name
    trace.append(Transmission(
        MobilityMessage(MessageKind.PBU, mu.mu_id,
                        options=(_opt(OptionKind.LNP, lnp),)),
        mz.name, lbs.name))
    lbs.bces[mu.mu_id] = BindingCacheEntry(mu.mu_id, lnp, mz.name,
                                           created_at=now)
    trace.append(Transmission(
        MobilityMessage(MessageKind.PBA, mu.mu_id,
                        options=(_opt(OptionKind.LNP, lnp),)),
        lbs.name, mz.name))
    trace.append(Transmission(
        MobilityMessage(MessageKind.RA, mu.mu_id,
                        options=(_opt(OptionKind.LNP, lnp),)),
        mz.name, mu.name))
    mu.lnp = lnp
    return trace


def lbs_update(lbs: Lbs, pbu: MobilityMessage,
               new_serving: str) -> tuple[BindingCacheEntry | None,
                                          MobilityMessage]:
    """Apply a handover binding update at the server.

    The previous serving zone is appended to the anchor list together with
    the prefix it keeps serving; the acknowledgement echoes that list. For
    an unknown mobile the cache is untouched and the returned
    acknowledgement carries no prefix option (binding miss).
    """
    entry = lbs.bces.get(pbu.mu_id)
    new_lnp_opt = pbu.option(OptionKind.LNP)
    if entry is None or new_lnp_opt is None:
        miss = MobilityMessage(MessageKind.PBA, pbu.mu_id)
        return None, miss
    entry.anchored.append((entry.serving_mz, entry.lnp))
    entry.serving_mz = new_serving
    entry.lnp = new_lnp_opt.payload.decode()
    pba = MobilityMessage(
        MessageKind.PBA, pbu.mu_id,
        options=(_opt(OptionKind.LNP, entry.lnp),
                 _opt(OptionKind.MZ_ADDR, _anchor_payload(entry.anchored))))
    return entry, pba


def predictive_handover(mu: Mu, serving_mz: MixZone, target_mz: MixZone,
                        lbs: Lbs, anchored: list[tuple[MixZone, str]],
                        now: float = 0.0) -> Trace:
    """Network-prepared handover while the old link is still usable.

    The mobile reports the scanned target; the serving zone pre-arms the
    target (new prefix, temporal binding, bidirectional tunnel) and orders
    the switch, deprecating the old prefix. After re-attachment the target
    registers at the server, which also refreshes every previously anchored
    zone. ``anchored`` lists (zone, prefix) pairs anchored before this
    handover.
    """
    if target_mz is serving_mz:
        return []  # movement within the zone: link-layer only, no signaling
    trace: Trace = []
    trace.append(Transmission(
        MobilityMessage(MessageKind.L2_REPORT, mu.mu_id,
                        options=(_opt(OptionKind.MZ_ADDR, target_mz.name),)),
        mu.name, serving_mz.name))

    old_lnp = mu.lnp or ""
    plnps = [old_lnp] + list(mu.plnps)
    hi_options = [
        _opt(OptionKind.PLNP_LIST, ",".join(plnps)),
        _opt(OptionKind.LBS_ADDR, lbs.name),
    ]
    if mu.ll_id:
        hi_options.append(_opt(OptionKind.MU_LLA_IID, str(mu.ll_id)))
    trace.append(Transmission(
        MobilityMessage(MessageKind.HI, mu.mu_id, d_flag=1, t_flag=0,
                        options=tuple(hi_options)),
        serving_mz.name, target_mz.name))

    new_lnp = target_mz.allocate_prefix()
    target_mz.bces[mu.mu_id] = BindingCacheEntry(
        mu.mu_id, new_lnp, target_mz.name, created_at=now, state="TEMPORAL")
    target_mz.routes[new_lnp] = mu.name
    trace.append(Transmission(
        MobilityMessage(MessageKind.HACK, mu.mu_id, d_flag=1, t_flag=0,
                        options=(_opt(OptionKind.LNP, new_lnp),)),
        target_mz.name, serving_mz.name))
    serving_mz.tunnels.add(serving_mz.name, target_mz.name, old_lnp)
    target_mz.tunnels.add(target_mz.name, serving_mz.name, old_lnp)

    # Switch order; the old prefix is advertised with a zero lifetime.
    trace.append(Transmission(
        MobilityMessage(MessageKind.HANDOVER_COMMAND, mu.mu_id,
                        options=(_opt(OptionKind.LNP, new_lnp),)),
        serving_mz.name, mu.name))
    if mu.lnp:
        mu.plnps.append(mu.lnp)
    mu.lnp = new_lnp
    serving_bce = serving_mz.bces.get(mu.mu_id)
    if serving_bce:
        serving_bce.state = "CONFIRMED"  # stays as anchor for old_lnp
    serving_mz.routes[old_lnp] = target_mz.name

    # After re-attachment: register at the server, then refresh old anchors.
    pbu = MobilityMessage(MessageKind.PBU, mu.mu_id,
                          options=(_opt(OptionKind.LNP, new_lnp),))
    trace.append(Transmission(pbu, target_mz.name, lbs.name))
    _, pba = lbs_update(lbs, pbu, target_mz.name)
    trace.append(Transmission(pba, lbs.name, target_mz.name))
    target_mz.bces[mu.mu_id].state = "CONFIRMED"
    for anchor_mz, anchor_prefix in anchored:
        trace.append(Transmission(
            MobilityMessage(MessageKind.PBU, mu.mu_id,
                            options=(_opt(OptionKind.MZ_ADDR,
                                          target_mz.name),)),
            lbs.name, anchor_mz.name))
        anchor_mz.tunnels.remove_prefix(anchor_prefix)
        anchor_mz.tunnels.add(anchor_mz.name, target_mz.name, anchor_prefix)
        target_mz.tunnels.add(target_mz.name, anchor_mz.name, anchor_prefix)
        trace.append(Transmission(
            MobilityMessage(MessageKind.PBA, mu.mu_id), anchor_mz.name,
            lbs.name))
    return trace


def reactive_handover(mu: Mu, new_mz: MixZone, reported_mz: MixZone,
                      lbs: Lbs, anchored: list[tuple[MixZone, str]],
                      now: float = 0.0) -> Trace:
    """Context pull after the mobile already re-attached elsewhere.

    The new zone asks the reported (previous) zone for the session context;
    on later roamings the acknowledgement also lists the anchoring zones and
    the new zone refreshes each of them directly (T=1), bypassing the
    server. Without context at the reported zone the procedure degenerates
    to a fresh initial attachment.
    """
    if mu.mu_id not in reported_mz.bces:
        return initial_attach(mu, new_mz, lbs, now)
    trace: Trace = []
    trace.append(Transmission(
        MobilityMessage(MessageKind.HI, mu.mu_id, d_flag=1, t_flag=2,
                        options=(MobilityOption(OptionKind.CONTEXT_REQUEST),)),
        new_mz.name, reported_mz.name))

    old_lnp = mu.lnp or ""
    hack_options = [
        _opt(OptionKind.LNP, old_lnp),
        _opt(OptionKind.LBS_ADDR, lbs.name),
        _opt(OptionKind.CONTEXT_REQUEST, "context"),
    ]
    if mu.ll_id:  # link-layer id only when valid (non-zero)
        hack_options.insert(1, _opt(OptionKind.MU_LLA_IID, str(mu.ll_id)))
    if anchored:
        hack_options.append(_opt(
            OptionKind.MZ_ADDR,
            _anchor_payload([(z.name, pfx) for z, pfx in anchored])))
    trace.append(Transmission(
        MobilityMessage(MessageKind.HACK, mu.mu_id, d_flag=1, t_flag=2,
                        options=tuple(hack_options)),
        reported_mz.name, new_mz.name))

    new_lnp = new_mz.allocate_prefix()
    new_mz.bces[mu.mu_id] = BindingCacheEntry(
        mu.mu_id, new_lnp, new_mz.name, created_at=now, state="TEMPORAL")
    new_mz.routes[new_lnp] = mu.name
    new_mz.tunnels.add(new_mz.name, reported_mz.name, old_lnp)
    reported_mz.tunnels.add(reported_mz.name, new_mz.name, old_lnp)
    reported_mz.routes[old_lnp] = new_mz.name
    if mu.lnp:
        mu.plnps.append(mu.lnp)
    mu.lnp = new_lnp

    # Second roaming onward: refresh each anchoring zone directly.
    for anchor_mz, anchor_prefix in anchored:
        trace.append(Transmission(
            MobilityMessage(MessageKind.HI, mu.mu_id, d_flag=1, t_flag=1,
                            options=(_opt(OptionKind.MZ_ADDR, new_mz.name),)),
            new_mz.name, anchor_mz.name))
        anchor_mz.routes[anchor_prefix] = new_mz.name
        anchor_mz.tunnels.remove_prefix(anchor_prefix)
        anchor_mz.tunnels.add(anchor_mz.name, new_mz.name, anchor_prefix)
        new_mz.tunnels.add(new_mz.name, anchor_mz.name, anchor_prefix)
        trace.append(Transmission(
            MobilityMessage(MessageKind.HACK, mu.mu_id, d_flag=1, t_flag=1),
            anchor_mz.name, new_mz.name))

    pbu = MobilityMessage(MessageKind.PBU, mu.mu_id,
                          options=(_opt(OptionKind.LNP, new_lnp),))
    trace.append(Transmission(pbu, new_mz.name, lbs.name))
    _, pba = lbs_update(lbs, pbu, new_mz.name)
    trace.append(Transmission(pba, lbs.name, new_mz.name))
    new_mz.bces[mu.mu_id].state = "CONFIRMED"
    return trace
