//! Rule-based data-type tagging for cell values.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::similarity::parse_number;

/// Thirteen value types plus `Text` for cells no rule recognizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataType {
    Number,
    Ordinal,
    Quantity,
    Temperature,
    Distance,
    Volume,
    AmountOfMoney,
    Duration,
    Time,
    Email,
    Url,
    PhoneNumber,
    CreditCardNumber,
    Text,
}

impl DataType {
    pub const ALL: [DataType; 14] = [
        DataType::Number,
        DataType::Ordinal,
        DataType::Quantity,
        DataType::Temperature,
        DataType::Distance,
        DataType::Volume,
        DataType::AmountOfMoney,
        DataType::Duration,
        DataType::Time,
        DataType::Email,
        DataType::Url,
        DataType::PhoneNumber,
        DataType::CreditCardNumber,
        DataType::Text,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DataType::Number => "number",
            DataType::Ordinal => "ordinal",
            DataType::Quantity => "quantity",
            DataType::Temperature => "temperature",
            DataType::Distance => "distance",
            DataType::Volume => "volume",
            DataType::AmountOfMoney => "amount-of-money",
            DataType::Duration => "duration",
            DataType::Time => "time",
            DataType::Email => "email",
            DataType::Url => "url",
            DataType::PhoneNumber => "phone-number",
            DataType::CreditCardNumber => "credit-card-number",
            DataType::Text => "text",
        }
    }

    /// Tags whose cells carry a magnitude usable for numeric comparison.
    pub fn is_numerical(self) -> bool {
        matches!(
            self,
            DataType::Number
                | DataType::Quantity
                | DataType::Temperature
                | DataType::Distance
                | DataType::Volume
                | DataType::AmountOfMoney
        )
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DataType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DataType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown data type {s:?}"))
    }
}

const NUM: &str = r"[-+]?\d+(?:[.,]\d+)*";

fn unit_regex(units: &str) -> Regex {
    Regex::new(&format!(r"(?i)^(?:{NUM})\s*(?:{units})\.?$")).unwrap()
}

static EMAIL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[\w.+-]+@[\w-]+(?:\.[\w-]+)+$").unwrap());
static URL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^(?:(?:https?|ftp)://\S+|www\.\S+\.\S+|[a-z0-9-]+(?:\.[a-z0-9-]+)*\.(?:com|org|net|edu|gov|io|info|de|fr|jp|uk|it|es)(?:/\S*)?)$").unwrap()
});
static CARD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d{4}(?:[ -]?\d{4}){2}[ -]?\d{1,7}$").unwrap());
static PHONE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?:\+|00)?[\d(][\d\s().-]{5,}\d$").unwrap());
static ORDINAL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^(?:\d+(?:st|nd|rd|th|\.?º|\.?ª)|first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth)$",
    )
    .unwrap()
});
static TEMPERATURE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)^(?:{NUM})\s*(?:°|º|degrees?|deg)\s*(?:c|f|k|celsius|fahrenheit)?$|^(?:{NUM})\s*(?:celsius|fahrenheit|kelvin)$"
    ))
    .unwrap()
});
static MONEY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)^(?:[$€£¥₹]|usd|eur|gbp|jpy|us\$)\s*(?:{NUM})\s*(?:[kmb]|million|billion)?$|^(?:{NUM})\s*(?:[kmb]|million|billion)?\s*(?:[$€£¥₹]|usd|eur|gbp|jpy|dollars?|euros?|pounds sterling|yen)$"
    ))
    .unwrap()
});
static DISTANCE: LazyLock<Regex> = LazyLock::new(|| {
    unit_regex("km|m|mi|miles?|ft|feet|foot|cm|mm|kilometres?|kilometers?|metres?|meters?|yards?|yd|inch(?:es)?|in")
});
static VOLUME: LazyLock<Regex> = LazyLock::new(|| {
    unit_regex("l|ml|cl|dl|litres?|liters?|millilitres?|milliliters?|gallons?|gal|m3|m³|cubic (?:metres?|meters?|feet)")
});
static QUANTITY: LazyLock<Regex> = LazyLock::new(|| {
    unit_regex("%|percent|kg|g|mg|lbs?|pounds?|tons?|tonnes?|t|oz|ounces?|grams?|kilograms?|cups?|km2|km²|sq ?km|ha|hectares?|acres?")
});
static DURATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)^(?:{NUM})\s*(?:seconds?|secs?|s|minutes?|mins?|hours?|hrs?|h|days?|weeks?|months?|years?|yrs?)$|^P(?:\d+[YMWD])*(?:T(?:\d+[HMS])+)?$"
    ))
    .unwrap()
});
static MONTHS: &str = "jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|sep(?:t(?:ember)?)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?";
static TIME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?ix)^(?:
            \d{{4}}-\d{{1,2}}-\d{{1,2}}(?:[t\s]\d{{1,2}}:\d{{2}}(?::\d{{2}})?(?:z|[+-]\d{{2}}:?\d{{2}})?)?
          | \d{{1,2}}[/.-]\d{{1,2}}[/.-]\d{{2,4}}
          | \d{{4}}/\d{{1,2}}/\d{{1,2}}
          | \d{{1,2}}(?:st|nd|rd|th)?\s+(?:{MONTHS})\.?,?\s+\d{{2,4}}
          | (?:{MONTHS})\.?\s+\d{{1,2}}(?:st|nd|rd|th)?,?\s+\d{{2,4}}
          | (?:{MONTHS})\.?\s+\d{{4}}
          | \d{{1,2}}:\d{{2}}(?::\d{{2}})?\s*(?:am|pm|a\.m\.|p\.m\.)?
          | \d{{1,2}}\s*(?:am|pm|a\.m\.|p\.m\.)
          | (?:mon|tues|wednes|thurs|fri|satur|sun)day
          | today|tomorrow|yesterday
        )$"
    ))
    .unwrap()
});

fn luhn_valid(digits: &[u32]) -> bool {
    let sum: u32 = digits
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &d)| {
            if i % 2 == 1 {
                let x = d * 2;
                if x > 9 {
                    x - 9
                } else {
                    x
                }
            } else {
                d
            }
        })
        .sum();
    sum.is_multiple_of(10)
}

/// Tags a decoded cell value with one of the [`DataType`]s; values no rule
/// recognizes are [`DataType::Text`].
pub fn predict_datatype(value: &str) -> DataType {
    let v = value.trim();
    if v.is_empty() {
        return DataType::Text;
    }
    if EMAIL.is_match(v) {
        return DataType::Email;
    }
    if URL.is_match(v) {
        return DataType::Url;
    }
    if CARD.is_match(v) {
        let digits: Vec<u32> = v.chars().filter_map(|c| c.to_digit(10)).collect();
        if (13..=19).contains(&digits.len()) && luhn_valid(&digits) {
            return DataType::CreditCardNumber;
        }
    }
    if parse_number(v).is_some() {
        return DataType::Number;
    }
    if TIME.is_match(v) {
        return DataType::Time;
    }
    if ORDINAL.is_match(v) {
        return DataType::Ordinal;
    }
    if TEMPERATURE.is_match(v) {
        return DataType::Temperature;
    }
    if MONEY.is_match(v) {
        return DataType::AmountOfMoney;
    }
    if DURATION.is_match(v) {
        return DataType::Duration;
    }
    if DISTANCE.is_match(v) {
        return DataType::Distance;
    }
    if VOLUME.is_match(v) {
        return DataType::Volume;
    }
    if QUANTITY.is_match(v) {
        return DataType::Quantity;
    }
    if PHONE.is_match(v) {
        let digits = v.chars().filter(char::is_ascii_digit).count();
        if (7..=15).contains(&digits) {
            return DataType::PhoneNumber;
        }
    }
    DataType::Text
}
