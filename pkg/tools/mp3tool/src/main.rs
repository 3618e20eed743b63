//! Minimal MP3 transcoding tool used as the external encoder/decoder
//! command by the audiodefect pipelines.
//!
//! Subcommands:
//!   encode <in.wav> <out.mp3> [--bitrate KBPS]   (CBR, mono only)
//!   decode <in.mp3> <out.wav>
//!   --version

use std::io::Read;
use std::process::ExitCode;

const VERSION: &str = concat!("mp3tool ", env!("CARGO_PKG_VERSION"));

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.len() >= 2 && (args[1] == "--version" || args[1] == "-V") {
        println!("{}", VERSION);
        return ExitCode::SUCCESS;
    }
    if args.len() < 4 {
        eprintln!("usage: mp3tool encode <in.wav> <out.mp3> [--bitrate KBPS]");
        eprintln!("       mp3tool decode <in.mp3> <out.wav>");
        return ExitCode::from(1);
    }
    let result = match args[1].as_str() {
        "encode" => encode(&args[2], &args[3], parse_bitrate(&args[4..])),
        "decode" => decode(&args[2], &args[3]),
        other => Err(format!("unknown subcommand: {}", other)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("mp3tool: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn parse_bitrate(rest: &[String]) -> u32 {
    let mut bitrate = 128;
    let mut it = rest.iter();
    while let Some(a) = it.next() {
        if a == "--bitrate" {
            if let Some(v) = it.next() {
                bitrate = v.parse().unwrap_or(128);
            }
        }
    }
    bitrate
}

fn encode(wav_path: &str, mp3_path: &str, bitrate_kbps: u32) -> Result<(), String> {
    use mp3lame_encoder::{Builder, Bitrate, FlushNoGap, MonoPcm, Quality};

    let mut reader = hound::WavReader::open(wav_path).map_err(|e| e.to_string())?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(format!("encoder expects mono input, got {} channels", spec.channels));
    }
    let samples: Vec<i16> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| (v.clamp(-1.0, 1.0) * 32767.0).round() as i16))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?,
        (fmt, bits) => return Err(format!("unsupported wav format: {:?}/{}", fmt, bits)),
    };

    let mut builder = Builder::new().ok_or("lame init failed")?;
    builder.set_num_channels(1).map_err(|e| e.to_string())?;
    builder.set_sample_rate(spec.sample_rate).map_err(|e| e.to_string())?;
    let br = match bitrate_kbps {
        64 => Bitrate::Kbps64,
        96 => Bitrate::Kbps96,
        128 => Bitrate::Kbps128,
        192 => Bitrate::Kbps192,
        320 => Bitrate::Kbps320,
        other => return Err(format!("unsupported bitrate: {}", other)),
    };
    builder.set_brate(br).map_err(|e| e.to_string())?;
    builder.set_quality(Quality::Good).map_err(|e| e.to_string())?;
    let mut encoder = builder.build().map_err(|e| e.to_string())?;

    let mut out = Vec::new();
    out.reserve(mp3lame_encoder::max_required_buffer_size(samples.len()));
    let encoded = encoder
        .encode(MonoPcm(&samples), out.spare_capacity_mut())
        .map_err(|e| e.to_string())?;
    unsafe { out.set_len(out.len() + encoded) };
    let flushed = encoder
        .flush::<FlushNoGap>(out.spare_capacity_mut())
        .map_err(|e| e.to_string())?;
    unsafe { out.set_len(out.len() + flushed) };

    std::fs::write(mp3_path, &out).map_err(|e| e.to_string())
}

fn decode(mp3_path: &str, wav_path: &str) -> Result<(), String> {
    let mut data = Vec::new();
    std::fs::File::open(mp3_path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| e.to_string())?;

    let mut decoder = minimp3::Decoder::new(std::io::Cursor::new(data));
    let mut samples: Vec<i16> = Vec::new();
    let mut sample_rate = 0u32;
    let mut channels = 0u16;
    loop {
        match decoder.next_frame() {
            Ok(frame) => {
                if sample_rate == 0 {
                    sample_rate = frame.sample_rate as u32;
                    channels = frame.channels as u16;
                } else if frame.sample_rate as u32 != sample_rate
                    || frame.channels as u16 != channels
                {
                    // Corruption can fake a format change mid-stream; treat
                    // as a decode failure so the caller reverts the frame.
                    return Err("stream parameters changed mid-decode".into());
                }
                samples.extend_from_slice(&frame.data);
            }
            Err(minimp3::Error::Eof) => break,
            Err(minimp3::Error::SkippedData) => continue,
            Err(e) => return Err(format!("decode error: {:?}", e)),
        }
    }
    if samples.is_empty() {
        return Err("no decodable frames".into());
    }

    let spec = hound::WavSpec {
        channels,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(wav_path, spec).map_err(|e| e.to_string())?;
    for s in samples {
        writer.write_sample(s).map_err(|e| e.to_string())?;
    }
    writer.finalize().map_err(|e| e.to_string())
}
