# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled data-plane kernel.

Method-for-method transliteration of the pure-Python kernel onto C
arrays: frame pool, ring-buffer queues and links, binary heaps keyed by
(time, sequence).  Any observable behaviour (event order, counters,
random draws, trace hash) must match the pure kernel bit for bit; the
equivalence tests enforce that.
"""

from libc.math cimport log
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memmove, memset

ctypedef long long i64
ctypedef unsigned long long u64

cdef i64 INF_NS = <i64>1 << 62
cdef u64 SPLITMIX_GAMMA = <u64>0x9E3779B97F4A7C15U
cdef u64 MULT_A = <u64>0xBF58476D1CE4E5B9U
cdef u64 MULT_B = <u64>0x94D049BB133111EBU
cdef u64 BE_SEED_MULT = <u64>0x5851F42D4C957F2DU
cdef u64 FNV_PRIME = <u64>0x100000001B3U
cdef double U53 = 1.0 / 9007199254740992.0  # 2 ** -53
cdef i64 NS_PER_S = 1_000_000_000

cdef int CLS_CDT = 0
cdef int CLS_ST = 1
cdef int CLS_BE = 2

EP_SINK = 0
EP_CONTROL = 1


cdef inline u64 splitmix_out(u64 state) noexcept nogil:
    cdef u64 z = state
    z = (z ^ (z >> 30)) * MULT_A
    z = (z ^ (z >> 27)) * MULT_B
    return z ^ (z >> 31)


cdef struct Ring:
    i64* buf
    int cap      # always a power of two
    int mask     # cap - 1, so index wraps are a single AND
    int head
    int length


cdef struct Link:
    i64* t_buf
    i64* f_buf
    int cap      # always a power of two
    int mask
    int head
    int length


cdef struct Port:
    i64 rate_bps
    int rate_shift  # log2(rate / 1 Gb/s) when exact, else -1
    i64 prop_ns
    char gated
    i64 capacity_bits
    i64 slot_ns
    i64 floor_slot
    i64 floor_until
    Ring queues[3]
    Ring tqueue     # express frames already forwarded by an upstream gate
    i64 queue_bits[3]
    i64 enq_ctr
    int* fd
    int fd_len
    int fd_cap
    i64* in_b
    i64* in_s
    i64* in_v
    int in_len
    int in_cap
    i64 busy_frame
    i64 busy_until
    char se_active
    i64* se_phase
    i64* se_flow
    i64* se_path
    i64* se_size
    i64* se_gamma
    i64* se_start
    i64* se_end
    int se_len
    int se_cap
    int src_cursor
    i64 src_base
    i64 src_next
    char be_active
    u64 be_state
    double be_gap_ns
    i64 be_size_bits
    i64 be_next
    int* bp
    int bp_len
    i64 sched_time
    i64 sched_seq
    i64 enq[3]
    i64 tx_frames[3]
    i64 tx_bits[3]
    i64 drops[3]


cdef inline int ring_init(Ring* r, int cap) except -1:
    r.buf = <i64*>malloc(cap * sizeof(i64))
    if r.buf == NULL:
        raise MemoryError()
    r.cap = cap
    r.mask = cap - 1
    r.head = 0
    r.length = 0
    return 0


cdef inline int ring_push(Ring* r, i64 value) except -1:
    cdef i64* nbuf
    cdef int i
    if r.length == r.cap:
        nbuf = <i64*>malloc(r.cap * 2 * sizeof(i64))
        if nbuf == NULL:
            raise MemoryError()
        for i in range(r.length):
            nbuf[i] = r.buf[(r.head + i) & r.mask]
        free(r.buf)
        r.buf = nbuf
        r.cap = r.cap * 2
        r.mask = r.cap - 1
        r.head = 0
    r.buf[(r.head + r.length) & r.mask] = value
    r.length += 1
    return 0


cdef inline i64 ring_pop(Ring* r) noexcept nogil:
    cdef i64 value = r.buf[r.head]
    r.head = (r.head + 1) & r.mask
    r.length -= 1
    return value


cdef inline int link_push(Link* l, i64 t, i64 f) except -1:
    cdef i64* nt
    cdef i64* nf
    cdef int i, idx
    if l.length == l.cap:
        nt = <i64*>malloc(l.cap * 2 * sizeof(i64))
        nf = <i64*>malloc(l.cap * 2 * sizeof(i64))
        if nt == NULL or nf == NULL:
            raise MemoryError()
        for i in range(l.length):
            idx = (l.head + i) & l.mask
            nt[i] = l.t_buf[idx]
            nf[i] = l.f_buf[idx]
        free(l.t_buf)
        free(l.f_buf)
        l.t_buf = nt
        l.f_buf = nf
        l.cap = l.cap * 2
        l.mask = l.cap - 1
        l.head = 0
    idx = (l.head + l.length) & l.mask
    l.t_buf[idx] = t
    l.f_buf[idx] = f
    l.length += 1
    return 0


cdef class FastKernel:
    """Compiled event kernel; public surface mirrors the pure kernel."""

    cdef public object backend
    cdef public i64 horizon_ns
    cdef public i64 ct_ns
    cdef public i64 guard_ns
    cdef public bint trace_enabled
    cdef public i64 clock_ns
    cdef i64 _cyc_base   # start of the cycle containing clock_ns
    cdef i64 _cyc_end    # _cyc_base + ct_ns
    cdef u64 _seed
    cdef u64 _trace_hash
    cdef i64 _seq
    cdef object _callback

    cdef Port* ports
    cdef int n_ports, port_cap

    cdef Link* links
    cdef int n_links, link_cap
    cdef dict _link_index

    # paths, flattened
    cdef i64* flat_ports
    cdef int flat_len, flat_cap
    cdef i64* flat_links
    cdef int flinks_len, flinks_cap
    cdef i64* path_off
    cdef i64* path_loff
    cdef int* path_len_arr
    cdef int* path_ep_kind
    cdef i64* path_ep_tag
    cdef int n_paths, path_cap

    # frame pool
    cdef char* f_klass
    cdef char* f_crossed
    cdef i64* f_eseq
    cdef i64* f_flow
    cdef i64* f_size
    cdef i64* f_created
    cdef i64* f_path
    cdef i64* f_cursor
    cdef i64* f_msg
    cdef int pool_cap, pool_len
    cdef i64* free_stack
    cdef int n_free

    # heaps
    cdef i64* eh_t
    cdef i64* eh_s
    cdef int* eh_p
    cdef int eh_len, eh_cap
    cdef i64* ch_t
    cdef i64* ch_s
    cdef i64* ch_tok
    cdef i64* ch_dat
    cdef int ch_len, ch_cap

    # network counters
    cdef i64 created_c[3]
    cdef i64 delivered_c[3]
    cdef i64 dropped_c[3]
    cdef i64 delivered_bits_c[3]
    cdef i64 delay_sum_c[3]
    cdef i64 delay_max_c[3]
    cdef i64* fc_arr
    cdef i64* fdv_arr
    cdef int n_flows

    def __cinit__(self, i64 horizon_ns, i64 ct_ns, seed,
                  i64 guard_cycles=10, bint trace=False):
        self.backend = "fast"
        self.horizon_ns = horizon_ns
        self.ct_ns = ct_ns
        self._seed = <u64>(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self.guard_ns = guard_cycles * ct_ns
        self.trace_enabled = trace
        self._trace_hash = <u64>0xCBF29CE484222325U
        self.clock_ns = 0
        self._cyc_base = 0
        self._cyc_end = ct_ns
        self._seq = 0
        self._callback = None
        self._link_index = {}

        self.port_cap = 64
        self.ports = <Port*>malloc(self.port_cap * sizeof(Port))
        self.link_cap = 64
        self.links = <Link*>malloc(self.link_cap * sizeof(Link))
        self.flat_cap = 256
        self.flat_ports = <i64*>malloc(self.flat_cap * sizeof(i64))
        self.flinks_cap = 256
        self.flat_links = <i64*>malloc(self.flinks_cap * sizeof(i64))
        self.path_cap = 64
        self.path_off = <i64*>malloc(self.path_cap * sizeof(i64))
        self.path_loff = <i64*>malloc(self.path_cap * sizeof(i64))
        self.path_len_arr = <int*>malloc(self.path_cap * sizeof(int))
        self.path_ep_kind = <int*>malloc(self.path_cap * sizeof(int))
        self.path_ep_tag = <i64*>malloc(self.path_cap * sizeof(i64))
        self.pool_cap = 1024
        self.f_klass = <char*>malloc(self.pool_cap)
        self.f_crossed = <char*>malloc(self.pool_cap)
        self.f_eseq = <i64*>malloc(self.pool_cap * sizeof(i64))
        self.f_flow = <i64*>malloc(self.pool_cap * sizeof(i64))
        self.f_size = <i64*>malloc(self.pool_cap * sizeof(i64))
        self.f_created = <i64*>malloc(self.pool_cap * sizeof(i64))
        self.f_path = <i64*>malloc(self.pool_cap * sizeof(i64))
        self.f_cursor = <i64*>malloc(self.pool_cap * sizeof(i64))
        self.f_msg = <i64*>malloc(self.pool_cap * sizeof(i64))
        self.free_stack = <i64*>malloc(self.pool_cap * sizeof(i64))
        self.eh_cap = 1024
        self.eh_t = <i64*>malloc(self.eh_cap * sizeof(i64))
        self.eh_s = <i64*>malloc(self.eh_cap * sizeof(i64))
        self.eh_p = <int*>malloc(self.eh_cap * sizeof(int))
        self.ch_cap = 1024
        self.ch_t = <i64*>malloc(self.ch_cap * sizeof(i64))
        self.ch_s = <i64*>malloc(self.ch_cap * sizeof(i64))
        self.ch_tok = <i64*>malloc(self.ch_cap * sizeof(i64))
        self.ch_dat = <i64*>malloc(self.ch_cap * sizeof(i64))
        if (self.ports == NULL or self.links == NULL or self.flat_ports == NULL
                or self.flat_links == NULL or self.path_off == NULL
                or self.path_loff == NULL or self.path_len_arr == NULL
                or self.path_ep_kind == NULL or self.path_ep_tag == NULL
                or self.f_klass == NULL or self.f_crossed == NULL
                or self.f_eseq == NULL or self.f_flow == NULL
                or self.f_size == NULL or self.f_created == NULL
                or self.f_path == NULL or self.f_cursor == NULL
                or self.f_msg == NULL or self.free_stack == NULL
                or self.eh_t == NULL or self.eh_s == NULL or self.eh_p == NULL
                or self.ch_t == NULL or self.ch_s == NULL
                or self.ch_tok == NULL or self.ch_dat == NULL):
            raise MemoryError()
        self.n_ports = 0
        self.n_links = 0
        self.flat_len = 0
        self.flinks_len = 0
        self.n_paths = 0
        self.pool_len = 0
        self.n_free = 0
        self.eh_len = 0
        self.ch_len = 0
        self.fc_arr = NULL
        self.fdv_arr = NULL
        self.n_flows = 0
        memset(self.created_c, 0, sizeof(self.created_c))
        memset(self.delivered_c, 0, sizeof(self.delivered_c))
        memset(self.dropped_c, 0, sizeof(self.dropped_c))
        memset(self.delivered_bits_c, 0, sizeof(self.delivered_bits_c))
        memset(self.delay_sum_c, 0, sizeof(self.delay_sum_c))
        memset(self.delay_max_c, 0, sizeof(self.delay_max_c))

    def __dealloc__(self):
        cdef int i, k
        cdef Port* p
        if self.ports != NULL:
            for i in range(self.n_ports):
                p = &self.ports[i]
                for k in range(3):
                    if p.queues[k].buf != NULL:
                        free(p.queues[k].buf)
                if p.tqueue.buf != NULL:
                    free(p.tqueue.buf)
                if p.fd != NULL:
                    free(p.fd)
                if p.in_b != NULL:
                    free(p.in_b)
                if p.in_s != NULL:
                    free(p.in_s)
                if p.in_v != NULL:
                    free(p.in_v)
                if p.se_phase != NULL:
                    free(p.se_phase)
                if p.se_flow != NULL:
                    free(p.se_flow)
                if p.se_path != NULL:
                    free(p.se_path)
                if p.se_size != NULL:
                    free(p.se_size)
                if p.se_gamma != NULL:
                    free(p.se_gamma)
                if p.se_start != NULL:
                    free(p.se_start)
                if p.se_end != NULL:
                    free(p.se_end)
                if p.bp != NULL:
                    free(p.bp)
            free(self.ports)
        if self.links != NULL:
            for i in range(self.n_links):
                if self.links[i].t_buf != NULL:
                    free(self.links[i].t_buf)
                if self.links[i].f_buf != NULL:
                    free(self.links[i].f_buf)
            free(self.links)
        free(self.flat_ports)
        free(self.flat_links)
        free(self.path_off)
        free(self.path_loff)
        free(self.path_len_arr)
        free(self.path_ep_kind)
        free(self.path_ep_tag)
        free(self.f_klass)
        free(self.f_crossed)
        free(self.f_eseq)
        free(self.f_flow)
        free(self.f_size)
        free(self.f_created)
        free(self.f_path)
        free(self.f_cursor)
        free(self.f_msg)
        free(self.free_stack)
        free(self.eh_t)
        free(self.eh_s)
        free(self.eh_p)
        free(self.ch_t)
        free(self.ch_s)
        free(self.ch_tok)
        free(self.ch_dat)
        if self.fc_arr != NULL:
            free(self.fc_arr)
        if self.fdv_arr != NULL:
            free(self.fdv_arr)

    # -- simple accessors mirroring pure attributes -------------------------

    @property
    def seed(self):
        return int(self._seed)

    @property
    def trace_hash(self):
        return int(self._trace_hash)

    @property
    def flow_created(self):
        return [int(self.fc_arr[i]) for i in range(self.n_flows)]

    @property
    def flow_delivered(self):
        return [int(self.fdv_arr[i]) for i in range(self.n_flows)]

    # -- construction --------------------------------------------------------

    def add_port(self, rate_bps, prop_ns, gated, capacity_bits, slot_ns):
        cdef Port* p
        cdef int k
        cdef i64 ratio
        if self.n_ports == self.port_cap:
            self.port_cap *= 2
            self.ports = <Port*>realloc(self.ports, self.port_cap * sizeof(Port))
            if self.ports == NULL:
                raise MemoryError()
        p = &self.ports[self.n_ports]
        memset(p, 0, sizeof(Port))
        p.rate_bps = rate_bps
        p.rate_shift = -1
        if p.rate_bps >= NS_PER_S and p.rate_bps % NS_PER_S == 0:
            ratio = p.rate_bps // NS_PER_S
            if ratio & (ratio - 1) == 0:
                p.rate_shift = 0
                while ratio > 1:
                    ratio >>= 1
                    p.rate_shift += 1
        p.prop_ns = prop_ns
        p.gated = 1 if gated else 0
        p.capacity_bits = capacity_bits
        p.slot_ns = slot_ns
        for k in range(3):
            ring_init(&p.queues[k], 16)
        ring_init(&p.tqueue, 16)
        p.fd_cap = 4
        p.fd = <int*>malloc(p.fd_cap * sizeof(int))
        p.in_cap = 8
        p.in_b = <i64*>malloc(p.in_cap * sizeof(i64))
        p.in_s = <i64*>malloc(p.in_cap * sizeof(i64))
        p.in_v = <i64*>malloc(p.in_cap * sizeof(i64))
        if p.fd == NULL or p.in_b == NULL or p.in_s == NULL or p.in_v == NULL:
            raise MemoryError()
        p.busy_frame = -1
        p.src_next = INF_NS
        p.be_next = INF_NS
        p.sched_time = INF_NS
        p.sched_seq = -1
        self.n_ports += 1
        return self.n_ports - 1

    cdef int _new_link(self) except -1:
        cdef Link* l
        if self.n_links == self.link_cap:
            self.link_cap *= 2
            self.links = <Link*>realloc(self.links, self.link_cap * sizeof(Link))
            if self.links == NULL:
                raise MemoryError()
        l = &self.links[self.n_links]
        l.cap = 16
        l.mask = l.cap - 1
        l.t_buf = <i64*>malloc(l.cap * sizeof(i64))
        l.f_buf = <i64*>malloc(l.cap * sizeof(i64))
        if l.t_buf == NULL or l.f_buf == NULL:
            raise MemoryError()
        l.head = 0
        l.length = 0
        self.n_links += 1
        return self.n_links - 1

    def add_path(self, ports, ep_kind, ep_tag):
        cdef list port_list = list(ports)
        cdef int n = len(port_list)
        cdef int i, li, b
        cdef Port* dst
        assert n >= 1, "a path needs at least one port"
        if self.n_paths == self.path_cap:
            self.path_cap *= 2
            self.path_off = <i64*>realloc(self.path_off, self.path_cap * sizeof(i64))
            self.path_loff = <i64*>realloc(self.path_loff, self.path_cap * sizeof(i64))
            self.path_len_arr = <int*>realloc(self.path_len_arr, self.path_cap * sizeof(int))
            self.path_ep_kind = <int*>realloc(self.path_ep_kind, self.path_cap * sizeof(int))
            self.path_ep_tag = <i64*>realloc(self.path_ep_tag, self.path_cap * sizeof(i64))
            if (self.path_off == NULL or self.path_loff == NULL
                    or self.path_len_arr == NULL or self.path_ep_kind == NULL
                    or self.path_ep_tag == NULL):
                raise MemoryError()
        while self.flat_len + n > self.flat_cap:
            self.flat_cap *= 2
            self.flat_ports = <i64*>realloc(self.flat_ports, self.flat_cap * sizeof(i64))
            if self.flat_ports == NULL:
                raise MemoryError()
        while self.flinks_len + n - 1 > self.flinks_cap:
            self.flinks_cap *= 2
            self.flat_links = <i64*>realloc(self.flat_links, self.flinks_cap * sizeof(i64))
            if self.flat_links == NULL:
                raise MemoryError()

        self.path_off[self.n_paths] = self.flat_len
        self.path_loff[self.n_paths] = self.flinks_len
        self.path_len_arr[self.n_paths] = n
        self.path_ep_kind[self.n_paths] = ep_kind
        self.path_ep_tag[self.n_paths] = ep_tag
        for i in range(n):
            self.flat_ports[self.flat_len + i] = port_list[i]
        self.flat_len += n
        for i in range(n - 1):
            key = (port_list[i], port_list[i + 1])
            cached = self._link_index.get(key)
            if cached is None:
                li = self._new_link()
                self._link_index[key] = li
                b = port_list[i + 1]
                dst = &self.ports[b]
                if dst.fd_len == dst.fd_cap:
                    dst.fd_cap *= 2
                    dst.fd = <int*>realloc(dst.fd, dst.fd_cap * sizeof(int))
                    if dst.fd == NULL:
                        raise MemoryError()
                dst.fd[dst.fd_len] = li
                dst.fd_len += 1
            else:
                li = cached
            self.flat_links[self.flinks_len + i] = li
        self.flinks_len += n - 1
        self.n_paths += 1
        return self.n_paths - 1

    def set_flow_count(self, n):
        cdef int m = n
        if self.fc_arr != NULL:
            free(self.fc_arr)
        if self.fdv_arr != NULL:
            free(self.fdv_arr)
        self.fc_arr = <i64*>malloc(max(m, 1) * sizeof(i64))
        self.fdv_arr = <i64*>malloc(max(m, 1) * sizeof(i64))
        if self.fc_arr == NULL or self.fdv_arr == NULL:
            raise MemoryError()
        memset(self.fc_arr, 0, max(m, 1) * sizeof(i64))
        memset(self.fdv_arr, 0, max(m, 1) * sizeof(i64))
        self.n_flows = m

    def set_control_callback(self, fn):
        self._callback = fn

    def attach_be_source(self, pid, mean_gap_ns, size_bits, path_ids):
        cdef Port* p = &self.ports[<int>pid]
        cdef list paths = list(path_ids)
        cdef int i
        cdef u64 z
        p.be_state = self._seed ^ (BE_SEED_MULT * <u64>(<i64>pid + 1))
        p.be_gap_ns = mean_gap_ns
        p.be_size_bits = size_bits
        p.bp_len = len(paths)
        p.bp = <int*>malloc(p.bp_len * sizeof(int))
        if p.bp == NULL:
            raise MemoryError()
        for i in range(p.bp_len):
            p.bp[i] = paths[i]
        p.be_state = p.be_state + SPLITMIX_GAMMA
        z = splitmix_out(p.be_state)
        p.be_next = self.clock_ns + self._exp_ns(z, p.be_gap_ns)
        p.be_active = 1
        self._reschedule(p, <int>pid)

    # -- control-plane entry points ------------------------------------------

    cdef int _ch_push(self, i64 t, i64 s, i64 tok, i64 dat) except -1:
        cdef int i, parent
        if self.ch_len == self.ch_cap:
            self.ch_cap *= 2
            self.ch_t = <i64*>realloc(self.ch_t, self.ch_cap * sizeof(i64))
            self.ch_s = <i64*>realloc(self.ch_s, self.ch_cap * sizeof(i64))
            self.ch_tok = <i64*>realloc(self.ch_tok, self.ch_cap * sizeof(i64))
            self.ch_dat = <i64*>realloc(self.ch_dat, self.ch_cap * sizeof(i64))
            if (self.ch_t == NULL or self.ch_s == NULL
                    or self.ch_tok == NULL or self.ch_dat == NULL):
                raise MemoryError()
        i = self.ch_len
        self.ch_t[i] = t
        self.ch_s[i] = s
        self.ch_tok[i] = tok
        self.ch_dat[i] = dat
        self.ch_len += 1
        while i > 0:
            parent = (i - 1) >> 1
            if (self.ch_t[i] < self.ch_t[parent]
                    or (self.ch_t[i] == self.ch_t[parent]
                        and self.ch_s[i] < self.ch_s[parent])):
                self._ch_swap(i, parent)
                i = parent
            else:
                break
        return 0

    cdef inline void _ch_swap(self, int a, int b) noexcept nogil:
        cdef i64 tmp
        tmp = self.ch_t[a]; self.ch_t[a] = self.ch_t[b]; self.ch_t[b] = tmp
        tmp = self.ch_s[a]; self.ch_s[a] = self.ch_s[b]; self.ch_s[b] = tmp
        tmp = self.ch_tok[a]; self.ch_tok[a] = self.ch_tok[b]; self.ch_tok[b] = tmp
        tmp = self.ch_dat[a]; self.ch_dat[a] = self.ch_dat[b]; self.ch_dat[b] = tmp

    cdef void _ch_pop(self) noexcept nogil:
        cdef int i = 0, child
        cdef int last = self.ch_len - 1
        self._ch_swap(0, last)
        self.ch_len = last
        while True:
            child = 2 * i + 1
            if child >= last:
                break
            if child + 1 < last and (
                    self.ch_t[child + 1] < self.ch_t[child]
                    or (self.ch_t[child + 1] == self.ch_t[child]
                        and self.ch_s[child + 1] < self.ch_s[child])):
                child += 1
            if (self.ch_t[child] < self.ch_t[i]
                    or (self.ch_t[child] == self.ch_t[i]
                        and self.ch_s[child] < self.ch_s[i])):
                self._ch_swap(i, child)
                i = child
            else:
                break

    cdef int _eh_push(self, i64 t, i64 s, int pid) except -1:
        cdef int i, parent
        if self.eh_len == self.eh_cap:
            self.eh_cap *= 2
            self.eh_t = <i64*>realloc(self.eh_t, self.eh_cap * sizeof(i64))
            self.eh_s = <i64*>realloc(self.eh_s, self.eh_cap * sizeof(i64))
            self.eh_p = <int*>realloc(self.eh_p, self.eh_cap * sizeof(int))
            if self.eh_t == NULL or self.eh_s == NULL or self.eh_p == NULL:
                raise MemoryError()
        i = self.eh_len
        self.eh_t[i] = t
        self.eh_s[i] = s
        self.eh_p[i] = pid
        self.eh_len += 1
        while i > 0:
            parent = (i - 1) >> 1
            if (self.eh_t[i] < self.eh_t[parent]
                    or (self.eh_t[i] == self.eh_t[parent]
                        and self.eh_s[i] < self.eh_s[parent])):
                self._eh_swap(i, parent)
                i = parent
            else:
                break
        return 0

    cdef inline void _eh_swap(self, int a, int b) noexcept nogil:
        cdef i64 tmp
        cdef int tp
        tmp = self.eh_t[a]; self.eh_t[a] = self.eh_t[b]; self.eh_t[b] = tmp
        tmp = self.eh_s[a]; self.eh_s[a] = self.eh_s[b]; self.eh_s[b] = tmp
        tp = self.eh_p[a]; self.eh_p[a] = self.eh_p[b]; self.eh_p[b] = tp

    cdef void _eh_pop(self) noexcept nogil:
        cdef int i = 0, child
        cdef int last = self.eh_len - 1
        self._eh_swap(0, last)
        self.eh_len = last
        while True:
            child = 2 * i + 1
            if child >= last:
                break
            if child + 1 < last and (
                    self.eh_t[child + 1] < self.eh_t[child]
                    or (self.eh_t[child + 1] == self.eh_t[child]
                        and self.eh_s[child + 1] < self.eh_s[child])):
                child += 1
            if (self.eh_t[child] < self.eh_t[i]
                    or (self.eh_t[child] == self.eh_t[i]
                        and self.eh_s[child] < self.eh_s[i])):
                self._eh_swap(i, child)
                i = child
            else:
                break

    def push_control(self, time_ns, token, data):
        self._seq += 1
        self._ch_push(time_ns, self._seq, token, data)

    def add_injector(self, pid, flow, path_id, size_bits, gamma, start_ns, end_ns):
        cdef Port* p = &self.ports[<int>pid]
        cdef i64 phase, flw = flow
        cdef int lo, hi, mid, n
        if not p.se_active:
            p.se_active = 1
            p.se_cap = 8
            p.se_phase = <i64*>malloc(p.se_cap * sizeof(i64))
            p.se_flow = <i64*>malloc(p.se_cap * sizeof(i64))
            p.se_path = <i64*>malloc(p.se_cap * sizeof(i64))
            p.se_size = <i64*>malloc(p.se_cap * sizeof(i64))
            p.se_gamma = <i64*>malloc(p.se_cap * sizeof(i64))
            p.se_start = <i64*>malloc(p.se_cap * sizeof(i64))
            p.se_end = <i64*>malloc(p.se_cap * sizeof(i64))
            if (p.se_phase == NULL or p.se_flow == NULL or p.se_path == NULL
                    or p.se_size == NULL or p.se_gamma == NULL
                    or p.se_start == NULL or p.se_end == NULL):
                raise MemoryError()
            p.se_len = 0
            p.src_cursor = 0
            p.src_base = self.clock_ns - self.clock_ns % self.ct_ns
        if p.se_len == p.se_cap:
            p.se_cap *= 2
            p.se_phase = <i64*>realloc(p.se_phase, p.se_cap * sizeof(i64))
            p.se_flow = <i64*>realloc(p.se_flow, p.se_cap * sizeof(i64))
            p.se_path = <i64*>realloc(p.se_path, p.se_cap * sizeof(i64))
            p.se_size = <i64*>realloc(p.se_size, p.se_cap * sizeof(i64))
            p.se_gamma = <i64*>realloc(p.se_gamma, p.se_cap * sizeof(i64))
            p.se_start = <i64*>realloc(p.se_start, p.se_cap * sizeof(i64))
            p.se_end = <i64*>realloc(p.se_end, p.se_cap * sizeof(i64))
            if (p.se_phase == NULL or p.se_flow == NULL or p.se_path == NULL
                    or p.se_size == NULL or p.se_gamma == NULL
                    or p.se_start == NULL or p.se_end == NULL):
                raise MemoryError()
        phase = (<i64>start_ns) % self.ct_ns
        lo = 0
        hi = p.se_len
        while lo < hi:
            mid = (lo + hi) // 2
            if (p.se_phase[mid] < phase
                    or (p.se_phase[mid] == phase and p.se_flow[mid] < flw)):
                lo = mid + 1
            else:
                hi = mid
        n = p.se_len - lo
        if n > 0:
            memmove(&p.se_phase[lo + 1], &p.se_phase[lo], n * sizeof(i64))
            memmove(&p.se_flow[lo + 1], &p.se_flow[lo], n * sizeof(i64))
            memmove(&p.se_path[lo + 1], &p.se_path[lo], n * sizeof(i64))
            memmove(&p.se_size[lo + 1], &p.se_size[lo], n * sizeof(i64))
            memmove(&p.se_gamma[lo + 1], &p.se_gamma[lo], n * sizeof(i64))
            memmove(&p.se_start[lo + 1], &p.se_start[lo], n * sizeof(i64))
            memmove(&p.se_end[lo + 1], &p.se_end[lo], n * sizeof(i64))
        p.se_phase[lo] = phase
        p.se_flow[lo] = flw
        p.se_path[lo] = path_id
        p.se_size[lo] = size_bits
        p.se_gamma[lo] = gamma
        p.se_start[lo] = start_ns
        p.se_end[lo] = end_ns
        p.se_len += 1
        if lo < p.src_cursor:
            p.src_cursor += 1
        self._advance_src(p)
        self._reschedule(p, <int>pid)

    cdef i64 _alloc_frame(self, int klass, i64 flow, i64 size_bits,
                          i64 created_ns, i64 path_id, i64 msg) except -1:
        cdef i64 idx
        cdef int ncap
        if self.n_free > 0:
            self.n_free -= 1
            idx = self.free_stack[self.n_free]
        else:
            if self.pool_len == self.pool_cap:
                ncap = self.pool_cap * 2
                self.f_klass = <char*>realloc(self.f_klass, ncap)
                self.f_crossed = <char*>realloc(self.f_crossed, ncap)
                self.f_eseq = <i64*>realloc(self.f_eseq, ncap * sizeof(i64))
                self.f_flow = <i64*>realloc(self.f_flow, ncap * sizeof(i64))
                self.f_size = <i64*>realloc(self.f_size, ncap * sizeof(i64))
                self.f_created = <i64*>realloc(self.f_created, ncap * sizeof(i64))
                self.f_path = <i64*>realloc(self.f_path, ncap * sizeof(i64))
                self.f_cursor = <i64*>realloc(self.f_cursor, ncap * sizeof(i64))
                self.f_msg = <i64*>realloc(self.f_msg, ncap * sizeof(i64))
                self.free_stack = <i64*>realloc(self.free_stack, ncap * sizeof(i64))
                if (self.f_klass == NULL or self.f_crossed == NULL
                        or self.f_eseq == NULL or self.f_flow == NULL
                        or self.f_size == NULL or self.f_created == NULL
                        or self.f_path == NULL or self.f_cursor == NULL
                        or self.f_msg == NULL or self.free_stack == NULL):
                    raise MemoryError()
                self.pool_cap = ncap
            idx = self.pool_len
            self.pool_len += 1
        self.f_klass[idx] = <char>klass
        self.f_crossed[idx] = 0
        self.f_eseq[idx] = 0
        self.f_flow[idx] = flow
        self.f_size[idx] = size_bits
        self.f_created[idx] = created_ns
        self.f_path[idx] = path_id
        self.f_cursor[idx] = 0
        self.f_msg[idx] = msg
        return idx

    cdef inline void _free_frame(self, i64 idx) noexcept nogil:
        self.free_stack[self.n_free] = idx
        self.n_free += 1

    def send_frame(self, path_id, klass, size_bits, msg):
        cdef int k = klass
        cdef i64 pathid = path_id
        cdef int pid = <int>self.flat_ports[self.path_off[pathid]]
        cdef Port* p = &self.ports[pid]
        cdef i64 fidx
        self._ingest(p, self.clock_ns)
        fidx = self._alloc_frame(k, -1, size_bits, self.clock_ns, pathid, msg)
        self.created_c[k] += 1
        self._enqueue(p, fidx)
        self._reschedule(p, pid)

    def install_gcl(self, pid, slot_ns, effective_ns):
        cdef Port* p = &self.ports[<int>pid]
        cdef i64 boundary = ((<i64>effective_ns + self.ct_ns - 1) // self.ct_ns) * self.ct_ns
        cdef int lo, hi, mid, n
        self._seq += 1
        if p.in_len == p.in_cap:
            p.in_cap *= 2
            p.in_b = <i64*>realloc(p.in_b, p.in_cap * sizeof(i64))
            p.in_s = <i64*>realloc(p.in_s, p.in_cap * sizeof(i64))
            p.in_v = <i64*>realloc(p.in_v, p.in_cap * sizeof(i64))
            if p.in_b == NULL or p.in_s == NULL or p.in_v == NULL:
                raise MemoryError()
        lo = 0
        hi = p.in_len
        while lo < hi:
            mid = (lo + hi) // 2
            if (p.in_b[mid] < boundary
                    or (p.in_b[mid] == boundary and p.in_s[mid] < self._seq)):
                lo = mid + 1
            else:
                hi = mid
        n = p.in_len - lo
        if n > 0:
            memmove(&p.in_b[lo + 1], &p.in_b[lo], n * sizeof(i64))
            memmove(&p.in_s[lo + 1], &p.in_s[lo], n * sizeof(i64))
            memmove(&p.in_v[lo + 1], &p.in_v[lo], n * sizeof(i64))
        p.in_b[lo] = boundary
        p.in_s[lo] = self._seq
        p.in_v[lo] = slot_ns
        p.in_len += 1
        self._reschedule(p, <int>pid)

    # -- introspection --------------------------------------------------------

    def port_slot_ns(self, pid):
        cdef Port* p = &self.ports[<int>pid]
        self._apply_installs(p, self.clock_ns)
        return int(self._effective_slot(p, self.clock_ns))

    def port_queue_bits(self, pid, klass):
        return int(self.ports[<int>pid].queue_bits[<int>klass])

    def port_counters(self, pid):
        cdef Port* p = &self.ports[<int>pid]
        return {
            "enq": [int(p.enq[k]) for k in range(3)],
            "tx_frames": [int(p.tx_frames[k]) for k in range(3)],
            "tx_bits": [int(p.tx_bits[k]) for k in range(3)],
            "drops": [int(p.drops[k]) for k in range(3)],
        }

    def resident_frames(self):
        cdef int i, k, j
        cdef Port* p
        cdef Link* l
        out = [0, 0, 0]
        for i in range(self.n_ports):
            p = &self.ports[i]
            for k in range(3):
                out[k] += p.queues[k].length
            out[CLS_ST] += p.tqueue.length
            if p.busy_frame >= 0:
                out[<int>self.f_klass[p.busy_frame]] += 1
        for i in range(self.n_links):
            l = &self.links[i]
            for j in range(l.length):
                out[<int>self.f_klass[l.f_buf[(l.head + j) & l.mask]]] += 1
        return out

    def counters(self):
        return {
            "created": [int(self.created_c[k]) for k in range(3)],
            "delivered": [int(self.delivered_c[k]) for k in range(3)],
            "dropped": [int(self.dropped_c[k]) for k in range(3)],
            "delivered_bits": [int(self.delivered_bits_c[k]) for k in range(3)],
            "delay_sum_ns": [int(self.delay_sum_c[k]) for k in range(3)],
            "delay_max_ns": [int(self.delay_max_c[k]) for k in range(3)],
        }

    # -- mechanics --------------------------------------------------------------

    cdef inline i64 _exp_ns(self, u64 z, double mean_ns) noexcept nogil:
        cdef double u = (<double>((z >> 11) + 1)) * U53
        return <i64>(-log(u) * mean_ns)

    cdef inline i64 _effective_slot(self, Port* p, i64 now) noexcept nogil:
        if now < p.floor_until and p.floor_slot > p.slot_ns:
            return p.floor_slot
        return p.slot_ns

    cdef int _enqueue(self, Port* p, i64 fidx) except -1:
        cdef int klass = <int>self.f_klass[fidx]
        if p.queue_bits[klass] + self.f_size[fidx] > p.capacity_bits:
            p.drops[klass] += 1
            self.dropped_c[klass] += 1
            self._free_frame(fidx)
            return 0
        self.f_eseq[fidx] = p.enq_ctr
        p.enq_ctr += 1
        if klass == CLS_ST and p.gated and self.f_crossed[fidx]:
            ring_push(&p.tqueue, fidx)
        else:
            ring_push(&p.queues[klass], fidx)
        p.queue_bits[klass] += self.f_size[fidx]
        p.enq[klass] += 1
        return 0

    cdef inline i64 _tx_ns(self, Port* p, i64 size_bits) noexcept nogil:
        if p.rate_shift >= 0:
            return size_bits >> p.rate_shift
        return size_bits * NS_PER_S // p.rate_bps

    cdef void _apply_installs(self, Port* p, i64 now) noexcept nogil:
        cdef i64 boundary, slot
        while p.in_len > 0 and p.in_b[0] <= now:
            boundary = p.in_b[0]
            slot = p.in_v[0]
            p.in_len -= 1
            if p.in_len > 0:
                memmove(&p.in_b[0], &p.in_b[1], p.in_len * sizeof(i64))
                memmove(&p.in_s[0], &p.in_s[1], p.in_len * sizeof(i64))
                memmove(&p.in_v[0], &p.in_v[1], p.in_len * sizeof(i64))
            if slot < p.slot_ns:
                if p.slot_ns > p.floor_slot or boundary + self.guard_ns > p.floor_until:
                    if p.slot_ns > p.floor_slot:
                        p.floor_slot = p.slot_ns
                    if boundary + self.guard_ns > p.floor_until:
                        p.floor_until = boundary + self.guard_ns
            p.slot_ns = slot

    cdef i64 _select(self, Port* p, i64 now) noexcept nogil:
        """Returns a frame index or -1; pops the chosen frame off its queue.

        Gated ports apply the window only to frames entering the ring
        here; frames already forwarded by an upstream gated port wait in
        the transit lane, which rides on class priority alone, so a
        multi-hop path never pays the cycle alignment wait twice.  When
        both lanes could start, the earlier arrival goes first.
        """
        cdef i64 pos, slot, fidx
        cdef int klass
        cdef Ring* r
        cdef Ring* tq
        if not p.gated:
            for klass in range(3):
                if p.queue_bits[klass] > 0:
                    return ring_pop(&p.queues[klass])
            return -1
        if p.queue_bits[CLS_CDT] > 0:
            return ring_pop(&p.queues[CLS_CDT])
        pos = now - self._cyc_base
        slot = self._effective_slot(p, now)
        r = &p.queues[CLS_ST]
        tq = &p.tqueue
        if r.length > 0 and pos < slot:
            fidx = r.buf[r.head]
            if pos + self._tx_ns(p, self.f_size[fidx]) <= slot:
                if tq.length == 0 or self.f_eseq[fidx] < self.f_eseq[tq.buf[tq.head]]:
                    return ring_pop(r)
        if tq.length > 0:
            return ring_pop(tq)
        if p.queue_bits[CLS_BE] > 0 and pos >= slot:
            fidx = p.queues[CLS_BE].buf[p.queues[CLS_BE].head]
            if pos + self._tx_ns(p, self.f_size[fidx]) <= self.ct_ns:
                return ring_pop(&p.queues[CLS_BE])
        return -1

    cdef i64 _wake_time(self, Port* p, i64 now) noexcept nogil:
        cdef i64 ct = self.ct_ns
        cdef i64 best, pos, base, slot, tx, start, fidx
        if not p.gated:
            return now
        if p.queue_bits[CLS_CDT] > 0:
            return now
        best = INF_NS
        if p.in_len > 0:
            best = p.in_b[0]
        if now < p.floor_until and p.floor_until < best:
            best = p.floor_until
        base = self._cyc_base
        pos = now - base
        slot = self._effective_slot(p, now)
        if p.tqueue.length > 0:
            return now
        if p.queues[CLS_ST].length > 0:
            fidx = p.queues[CLS_ST].buf[p.queues[CLS_ST].head]
            tx = self._tx_ns(p, self.f_size[fidx])
            if pos + tx <= slot:
                return now
            if tx <= slot and base + ct < best:
                best = base + ct
        if p.queue_bits[CLS_BE] > 0:
            fidx = p.queues[CLS_BE].buf[p.queues[CLS_BE].head]
            tx = self._tx_ns(p, self.f_size[fidx])
            if pos >= slot and pos + tx <= ct:
                return now
            if slot + tx <= ct:
                start = base + slot if pos < slot else base + ct + slot
                if start < best:
                    best = start
        return best

    cdef void _advance_src(self, Port* p) noexcept nogil:
        cdef i64 ct = self.ct_ns
        cdef i64 t_fire
        cdef int n
        if p.se_len == 0:
            p.src_next = INF_NS
            return
        while True:
            if p.src_cursor >= p.se_len:
                p.src_cursor = 0
                p.src_base += ct
                if p.se_len == 0:
                    p.src_next = INF_NS
                    return
                continue
            t_fire = p.src_base + p.se_phase[p.src_cursor]
            if t_fire >= p.se_end[p.src_cursor]:
                n = p.se_len - p.src_cursor - 1
                if n > 0:
                    memmove(&p.se_phase[p.src_cursor], &p.se_phase[p.src_cursor + 1], n * sizeof(i64))
                    memmove(&p.se_flow[p.src_cursor], &p.se_flow[p.src_cursor + 1], n * sizeof(i64))
                    memmove(&p.se_path[p.src_cursor], &p.se_path[p.src_cursor + 1], n * sizeof(i64))
                    memmove(&p.se_size[p.src_cursor], &p.se_size[p.src_cursor + 1], n * sizeof(i64))
                    memmove(&p.se_gamma[p.src_cursor], &p.se_gamma[p.src_cursor + 1], n * sizeof(i64))
                    memmove(&p.se_start[p.src_cursor], &p.se_start[p.src_cursor + 1], n * sizeof(i64))
                    memmove(&p.se_end[p.src_cursor], &p.se_end[p.src_cursor + 1], n * sizeof(i64))
                p.se_len -= 1
                if p.se_len == 0:
                    p.src_next = INF_NS
                    return
                continue
            if t_fire < p.se_start[p.src_cursor]:
                p.src_cursor += 1
                continue
            p.src_next = t_fire
            return

    cdef int _fire_src(self, Port* p) except -1:
        """Emit one due injector fire (all of its frames share the instant)."""
        cdef i64 t = p.src_next
        cdef i64 fidx, g
        cdef int cur = p.src_cursor
        for g in range(p.se_gamma[cur]):
            fidx = self._alloc_frame(CLS_ST, p.se_flow[cur], p.se_size[cur],
                                     t, p.se_path[cur], -1)
            self.created_c[CLS_ST] += 1
            self.fc_arr[p.se_flow[cur]] += 1
            self._enqueue(p, fidx)
        p.src_cursor += 1
        self._advance_src(p)
        return 0

    cdef int _fire_be(self, Port* p) except -1:
        """Emit one due background frame and draw the next gap."""
        cdef i64 t = p.be_next
        cdef i64 fidx
        cdef u64 z
        cdef int idx
        p.be_state = p.be_state + SPLITMIX_GAMMA
        z = splitmix_out(p.be_state)
        idx = <int>(((z >> 11) * <u64>p.bp_len) >> 53)
        fidx = self._alloc_frame(CLS_BE, -1, p.be_size_bits, t, p.bp[idx], -1)
        self.created_c[CLS_BE] += 1
        self._enqueue(p, fidx)
        p.be_state = p.be_state + SPLITMIX_GAMMA
        z = splitmix_out(p.be_state)
        p.be_next = t + self._exp_ns(z, p.be_gap_ns)
        return 0

    cdef int _ingest(self, Port* p, i64 now) except -1:
        """Move every due frame into the port's queues, in arrival order.

        Feeders, the periodic injector, and the background source merge
        into one time-ordered stream; ties go to the lowest feeder index,
        then the injector, then the background source, so replay order is
        well defined.  Arrivals at a transmitting port wait here for its
        completion wake, which cannot change what the port sends (nothing
        leaves a queue while the port is busy).  Anything that enqueues
        out of band or edits the injector table must call this first.
        """
        cdef Link* best
        cdef Link* l
        cdef i64 best_t, t, fidx, src_t, be_t
        cdef int i
        while True:
            best = NULL
            best_t = INF_NS
            for i in range(p.fd_len):
                l = &self.links[p.fd[i]]
                if l.length > 0:
                    t = l.t_buf[l.head]
                    if t <= now and t < best_t:
                        best_t = t
                        best = l
            src_t = p.src_next
            be_t = p.be_next
            if best != NULL and src_t >= best_t and be_t >= best_t:
                fidx = best.f_buf[best.head]
                best.head = (best.head + 1) & best.mask
                best.length -= 1
                self._enqueue(p, fidx)
            elif src_t <= now and src_t <= best_t and src_t <= be_t:
                self._fire_src(p)
            elif be_t <= now and be_t < best_t and be_t < src_t:
                self._fire_be(p)
            else:
                return 0

    cdef int _complete(self, Port* p) except -1:
        cdef i64 fidx = p.busy_frame
        cdef i64 done = p.busy_until
        cdef int klass = <int>self.f_klass[fidx]
        cdef i64 pathid, arrival, delay, li
        cdef int nxt_pid, plen
        p.busy_frame = -1
        p.tx_frames[klass] += 1
        p.tx_bits[klass] += self.f_size[fidx]
        if klass == CLS_ST and p.gated:
            self.f_crossed[fidx] = 1
        pathid = self.f_path[fidx]
        plen = self.path_len_arr[pathid]
        if self.f_cursor[fidx] + 1 < plen:
            li = self.flat_links[self.path_loff[pathid] + self.f_cursor[fidx]]
            self.f_cursor[fidx] += 1
            link_push(&self.links[li], done + p.prop_ns, fidx)
            nxt_pid = <int>self.flat_ports[self.path_off[pathid] + self.f_cursor[fidx]]
            self._reschedule(&self.ports[nxt_pid], nxt_pid)
        else:
            arrival = done + p.prop_ns
            self.delivered_c[klass] += 1
            self.delivered_bits_c[klass] += self.f_size[fidx]
            if self.path_ep_kind[pathid] == 0:  # sink
                delay = arrival - self.f_created[fidx]
                self.delay_sum_c[klass] += delay
                if delay > self.delay_max_c[klass]:
                    self.delay_max_c[klass] = delay
                if self.f_flow[fidx] >= 0:
                    self.fdv_arr[self.f_flow[fidx]] += 1
            else:
                self._seq += 1
                self._ch_push(arrival, self._seq, self.path_ep_tag[pathid],
                              self.f_msg[fidx])
            self._free_frame(fidx)
        return 0

    cdef int _handle(self, Port* p, i64 now) except -1:
        cdef i64 fidx
        self._apply_installs(p, now)
        if p.busy_frame >= 0 and p.busy_until <= now:
            self._complete(p)
        self._ingest(p, now)
        if p.busy_frame < 0:
            fidx = self._select(p, now)
            if fidx >= 0:
                p.queue_bits[<int>self.f_klass[fidx]] -= self.f_size[fidx]
                p.busy_frame = fidx
                p.busy_until = now + self._tx_ns(p, self.f_size[fidx])
        return 0

    cdef i64 _next_action(self, Port* p) noexcept nogil:
        # A transmitting port sleeps until its frame ends: arrivals due in
        # the meantime are ingested by the completion wake in arrival
        # order, which cannot change anything it sends.
        cdef i64 t
        cdef Link* l
        cdef int i
        if p.busy_frame >= 0:
            return p.busy_until
        t = INF_NS
        if p.queue_bits[0] > 0 or p.queue_bits[1] > 0 or p.queue_bits[2] > 0:
            t = self._wake_time(p, self.clock_ns)
        elif p.in_len > 0:
            t = p.in_b[0]
        for i in range(p.fd_len):
            l = &self.links[p.fd[i]]
            if l.length > 0 and l.t_buf[l.head] < t:
                t = l.t_buf[l.head]
        if p.src_next < t:
            t = p.src_next
        if p.be_next < t:
            t = p.be_next
        return t

    cdef int _reschedule(self, Port* p, int pid) except -1:
        cdef i64 t = self._next_action(p)
        if t == p.sched_time:
            return 0
        p.sched_time = t
        if t >= INF_NS:
            p.sched_seq = -1
            return 0
        self._seq += 1
        p.sched_seq = self._seq
        self._eh_push(t, self._seq, pid)
        return 0

    cdef inline void _mix_trace(self, i64 a, i64 b, i64 c) noexcept nogil:
        cdef u64 h = self._trace_hash
        h = (h ^ <u64>a) * FNV_PRIME
        h = (h ^ <u64>b) * FNV_PRIME
        h = (h ^ <u64>c) * FNV_PRIME
        self._trace_hash = h

    # -- main loop ----------------------------------------------------------------

    def run(self):
        cdef i64 horizon = self.horizon_ns
        cdef i64 time_ns, seq, token, data
        cdef int pid
        cdef bint take_control
        cdef Port* p
        while True:
            if self.eh_len == 0 and self.ch_len == 0:
                break
            if self.ch_len > 0 and (
                    self.eh_len == 0
                    or self.ch_t[0] < self.eh_t[0]
                    or (self.ch_t[0] == self.eh_t[0] and self.ch_s[0] < self.eh_s[0])):
                time_ns = self.ch_t[0]
                token = self.ch_tok[0]
                data = self.ch_dat[0]
                self._ch_pop()
                if time_ns > horizon:
                    break
                if time_ns < self.clock_ns:
                    raise RuntimeError(
                        f"control event at {time_ns} scheduled in the past "
                        f"(clock {self.clock_ns})"
                    )
                self.clock_ns = time_ns
                if time_ns >= self._cyc_end:
                    self._cyc_base = time_ns - time_ns % self.ct_ns
                    self._cyc_end = self._cyc_base + self.ct_ns
                if self.trace_enabled:
                    self._mix_trace(time_ns, (<i64>1 << 40) | token, data)
                self._callback(token, data, time_ns)
            else:
                time_ns = self.eh_t[0]
                seq = self.eh_s[0]
                pid = self.eh_p[0]
                self._eh_pop()
                p = &self.ports[pid]
                if seq != p.sched_seq:
                    continue  # superseded entry
                if time_ns > horizon:
                    break
                if time_ns < self.clock_ns:
                    raise RuntimeError(
                        f"port {pid} woken at {time_ns}, before clock "
                        f"{self.clock_ns}"
                    )
                self.clock_ns = time_ns
                if time_ns >= self._cyc_end:
                    self._cyc_base = time_ns - time_ns % self.ct_ns
                    self._cyc_end = self._cyc_base + self.ct_ns
                p.sched_time = INF_NS
                p.sched_seq = -1
                if self.trace_enabled:
                    self._mix_trace(time_ns, pid, p.queue_bits[1])
                self._handle(p, time_ns)
                self._reschedule(p, pid)
        self.clock_ns = horizon
