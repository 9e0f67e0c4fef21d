//! Fixed-point arithmetic for the oracle.
//!
//! `Fx<N>` is an unsigned fixed-point number of N 64-bit words, little-endian,
//! with one integer word at the top: value = sum w[i] * 2^(64*(i - (N-1))).
//! The fraction therefore carries 64*(N-1) bits. All operations truncate
//! toward zero; callers account for the (bounded) truncation error.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fx<const N: usize> {
    pub w: [u64; N],
}

impl<const N: usize> Fx<N> {
    pub const FRAC_BITS: i32 = 64 * (N as i32 - 1);

    pub fn zero() -> Self {
        Fx { w: [0u64; N] }
    }

    pub fn from_int(v: u64) -> Self {
        let mut w = [0u64; N];
        w[N - 1] = v;
        Fx { w }
    }

    pub fn is_zero(&self) -> bool {
        self.w.iter().all(|&x| x == 0)
    }

    pub fn int_part(&self) -> u64 {
        self.w[N - 1]
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        let mut carry = 0u64;
        for i in 0..N {
            let (s1, c1) = self.w[i].overflowing_add(rhs.w[i]);
            let (s2, c2) = s1.overflowing_add(carry);
            self.w[i] = s2;
            carry = (c1 as u64) + (c2 as u64);
        }
    }

    /// self -= rhs; requires self >= rhs.
    pub fn sub_assign(&mut self, rhs: &Self) {
        let mut borrow = 0u64;
        for i in 0..N {
            let (d1, b1) = self.w[i].overflowing_sub(rhs.w[i]);
            let (d2, b2) = d1.overflowing_sub(borrow);
            self.w[i] = d2;
            borrow = (b1 as u64) + (b2 as u64);
        }
        debug_assert_eq!(borrow, 0, "fx underflow");
    }

    pub fn cmp_mag(&self, rhs: &Self) -> std::cmp::Ordering {
        for i in (0..N).rev() {
            match self.w[i].cmp(&rhs.w[i]) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }

    /// Truncating product; drops the low N-1 words of the exact result.
    /// Truncation error < N * 2^-FRAC_BITS... strictly, < (N+1) ulps.
    pub fn mul(&self, rhs: &Self) -> Self {
        let mut prod = [0u64; 64]; // 2N <= 64 for all instantiations used
        debug_assert!(2 * N <= 64);
        for i in 0..N {
            if self.w[i] == 0 {
                continue;
            }
            let a = self.w[i] as u128;
            let mut carry = 0u128;
            for j in 0..N {
                let t = a * rhs.w[j] as u128 + prod[i + j] as u128 + carry;
                prod[i + j] = t as u64;
                carry = t >> 64;
            }
            let mut idx = i + N;
            while carry != 0 {
                let t = prod[idx] as u128 + carry;
                prod[idx] = t as u64;
                carry = t >> 64;
                idx += 1;
            }
        }
        let mut w = [0u64; N];
        w.copy_from_slice(&prod[N - 1..2 * N - 1]);
        Fx { w }
    }

    pub fn mul_small(&self, rhs: u64) -> Self {
        let mut w = [0u64; N];
        let mut carry = 0u128;
        for i in 0..N {
            let t = self.w[i] as u128 * rhs as u128 + carry;
            w[i] = t as u64;
            carry = t >> 64;
        }
        debug_assert_eq!(carry, 0, "fx mul_small overflow");
        Fx { w }
    }

    pub fn div_small(&self, rhs: u64) -> Self {
        let mut w = [0u64; N];
        let mut rem = 0u128;
        for i in (0..N).rev() {
            let cur = (rem << 64) | self.w[i] as u128;
            w[i] = (cur / rhs as u128) as u64;
            rem = cur % rhs as u128;
        }
        Fx { w }
    }

    /// Shift right by `n` bits (n < 64*N).
    pub fn shr(&self, n: u32) -> Self {
        let words = (n / 64) as usize;
        let bits = n % 64;
        let mut w = [0u64; N];
        for i in 0..N {
            let src = i + words;
            let lo = if src < N { self.w[src] >> bits } else { 0 };
            let hi = if bits > 0 && src + 1 < N {
                self.w[src + 1] << (64 - bits)
            } else {
                0
            };
            w[i] = lo | hi;
        }
        Fx { w }
    }

    /// Shift left by `n` bits (n < 64*N); high bits shifted out are lost.
    pub fn shl(&self, n: u32) -> Self {
        let words = (n / 64) as usize;
        let bits = n % 64;
        let mut w = [0u64; N];
        for i in (0..N).rev() {
            if i < words {
                break;
            }
            let src = i - words;
            let lo = self.w[src] << bits;
            let hi = if bits > 0 && src > 0 {
                self.w[src - 1] >> (64 - bits)
            } else {
                0
            };
            w[i] = lo | hi;
        }
        Fx { w }
    }

    /// Exact conversion of a non-negative binary64 whose value fits the
    /// layout (v < 2^64, lsb weight >= 2^-FRAC_BITS).
    pub fn from_f64_exact(v: f64) -> Self {
        debug_assert!(v >= 0.0 && v.is_finite());
        let mut out = Fx::zero();
        if v == 0.0 {
            return out;
        }
        let bits = v.to_bits();
        let e = (bits >> 52) as i32 - 1023 - 52;
        let m = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
        let pos = e as i64 + 64 * (N as i64 - 1); // global bit index of m's lsb
        debug_assert!(pos >= 0, "value too small for exact fx conversion");
        let wi = (pos / 64) as usize;
        let bo = pos % 64;
        let wide = (m as u128) << bo;
        out.w[wi] = wide as u64;
        if wi + 1 < N {
            out.w[wi + 1] = (wide >> 64) as u64;
        } else {
            debug_assert_eq!(wide >> 64, 0, "value too large for layout");
        }
        out
    }

    /// Splits into a hi/lo pair of binary64 values with hi + lo accurate to
    /// roughly 2^-104 relative.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        let hi = self.to_f64();
        if hi == 0.0 {
            return (0.0, 0.0);
        }
        let hi_fx = Self::from_f64_exact(hi);
        match self.cmp_mag(&hi_fx) {
            std::cmp::Ordering::Less => {
                let mut d = hi_fx;
                d.sub_assign(self);
                (hi, -d.to_f64())
            }
            _ => {
                let mut d = *self;
                d.sub_assign(&hi_fx);
                (hi, d.to_f64())
            }
        }
    }

    /// Bit position of the most significant set bit relative to the binary
    /// point: value is in [2^msb, 2^(msb+1)). None for zero.
    pub fn msb_exp(&self) -> Option<i32> {
        for i in (0..N).rev() {
            if self.w[i] != 0 {
                let top = 63 - self.w[i].leading_zeros() as i32;
                return Some(64 * (i as i32 - (N as i32 - 1)) + top);
            }
        }
        None
    }

    /// Correctly rounded (nearest, ties to even) conversion. Unlike to_f64
    /// this never double-rounds: the 53-bit significand, round bit and
    /// sticky bits are read straight off the words.
    pub fn to_f64_rn(&self) -> f64 {
        let e = match self.msb_exp() {
            Some(e) => e,
            None => return 0.0,
        };
        let lsb = e - 52 + Self::FRAC_BITS;
        let mut sig = extract64(&self.w, lsb as i64);
        debug_assert!(sig >> 53 == 0 && sig >> 52 == 1);
        let round = lsb > 0 && (self.w[(lsb as usize - 1) / 64] >> ((lsb - 1) % 64)) & 1 == 1;
        let sticky = lsb > 1 && any_bits_below(&self.w, (lsb - 1) as i64);
        if round && (sticky || sig & 1 == 1) {
            sig += 1;
        }
        sig as f64 * crate::fpcore::exp2i(e - 52)
    }

    /// Approximate conversion; accurate to f64 precision.
    pub fn to_f64(&self) -> f64 {
        let mut acc = 0.0f64;
        for i in (0..N).rev() {
            acc = acc * 18446744073709551616.0 + self.w[i] as f64;
        }
        acc * crate::fpcore::exp2i(-64 * (N as i32 - 1))
    }
}

/// Extracts 64 bits starting at global bit index `start` (bit 0 = lsb of
/// word 0) from a little-endian word slice; out-of-range bits read as zero.
pub fn extract64(words: &[u64], start: i64) -> u64 {
    let mut out = 0u64;
    // Assemble from the two (or one) source words covering [start, start+64).
    let wi = start.div_euclid(64);
    let bo = start.rem_euclid(64) as u32;
    let get = |i: i64| -> u64 {
        if i >= 0 && (i as usize) < words.len() {
            words[i as usize]
        } else {
            0
        }
    };
    out |= get(wi) >> bo;
    if bo > 0 {
        out |= get(wi + 1) << (64 - bo);
    }
    out
}

/// True if any bit at global index < `below` is set.
pub fn any_bits_below(words: &[u64], below: i64) -> bool {
    if below <= 0 {
        return false;
    }
    let full = (below / 64) as usize;
    let rem = (below % 64) as u32;
    for &w in words.iter().take(full.min(words.len())) {
        if w != 0 {
            return true;
        }
    }
    if rem > 0 && full < words.len() {
        return words[full] & ((1u64 << rem) - 1) != 0;
    }
    false
}

/// True if every bit at global index in [lo, hi) is set.
pub fn all_bits_in(words: &[u64], lo: i64, hi: i64) -> bool {
    let mut g = lo;
    while g < hi {
        let chunk = extract64(words, g);
        let width = (hi - g).min(64) as u32;
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        if chunk & mask != mask {
            return false;
        }
        g += 64;
    }
    true
}

/// True if any bit at global index in [lo, hi) is set.
pub fn any_bits_in(words: &[u64], lo: i64, hi: i64) -> bool {
    let mut g = lo;
    while g < hi {
        let chunk = extract64(words, g);
        let width = (hi - g).min(64) as u32;
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        if chunk & mask != 0 {
            return true;
        }
        g += 64;
    }
    false
}
