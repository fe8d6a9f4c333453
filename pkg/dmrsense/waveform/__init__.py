"""Reference-signal and OFDM waveform modules"""
