use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionStyle {
    Put,
    Call,
}

/// European vanilla option on a forward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanillaContract {
    pub forward: f64,
    pub strike: f64,
    pub maturity: f64,
    pub discount: f64,
    pub style: OptionStyle,
}

impl VanillaContract {
    pub fn new(forward: f64, strike: f64, maturity: f64, discount: f64, style: OptionStyle) -> Result<Self> {
        let c = Self {
            forward,
            strike,
            maturity,
            discount,
            style,
        };
        c.validate()?;
        Ok(c)
    }

    /// Undiscounted put.
    pub fn put(forward: f64, strike: f64, maturity: f64) -> Result<Self> {
        Self::new(forward, strike, maturity, 1.0, OptionStyle::Put)
    }

    /// Undiscounted call.
    pub fn call(forward: f64, strike: f64, maturity: f64) -> Result<Self> {
        Self::new(forward, strike, maturity, 1.0, OptionStyle::Call)
    }

    pub fn with_style(mut self, style: OptionStyle) -> Self {
        self.style = style;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.forward > 0.0 && self.forward.is_finite()) {
            return Err(invalid("forward", format!("must be positive, got {}", self.forward)));
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(invalid("strike", format!("must be positive, got {}", self.strike)));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(invalid("maturity", format!("must be positive, got {}", self.maturity)));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(invalid("discount", format!("must lie in (0, 1], got {}", self.discount)));
        }
        Ok(())
    }

    /// `x = ln(F / K)`.
    pub fn log_moneyness(&self) -> f64 {
        (self.forward / self.strike).ln()
    }

    /// `B (F - K)`, the call-minus-put value.
    pub fn parity_offset(&self) -> f64 {
        self.discount * (self.forward - self.strike)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(VanillaContract::put(100.0, 110.0, 1.0).is_ok());
        assert!(VanillaContract::put(0.0, 110.0, 1.0).is_err());
        assert!(VanillaContract::put(100.0, -1.0, 1.0).is_err());
        assert!(VanillaContract::put(100.0, 1.0, 0.0).is_err());
        assert!(VanillaContract::new(100.0, 1.0, 1.0, 1.5, OptionStyle::Call).is_err());
        assert!(VanillaContract::new(100.0, 1.0, 1.0, 0.0, OptionStyle::Call).is_err());
    }

    #[test]
    fn moneyness() {
        let c = VanillaContract::put(100.0, 100.0, 1.0).unwrap();
        assert_eq!(c.log_moneyness(), 0.0);
        let c = VanillaContract::call(1.0, std::f64::consts::E, 1.0).unwrap();
        assert!((c.log_moneyness() + 1.0).abs() < 1e-15);
    }
}
