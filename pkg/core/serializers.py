"""
Run Configuration Serializers
DRF validation of the JSON run-config document and the run manifest
"""
from django.conf import settings
from rest_framework import serializers

from codes.fixtures import FIXTURES
from decoding.channel import snr_grid


def _project(key):
    return lambda: settings.WBPDECODE_CONFIG[key]


def flatten_errors(detail, prefix=''):
    """
    Turn nested serializer errors into ``key.path: message`` lines.
    """
    lines = []
    if isinstance(detail, dict):
        for key, value in detail.items():
            if key == 'non_field_errors':
                path = prefix
            else:
                path = f"{prefix}.{key}" if prefix else str(key)
            lines.extend(flatten_errors(value, path))
    elif isinstance(detail, list):
        for item in detail:
            lines.extend(flatten_errors(item, prefix))
    else:
        lines.append(f"{prefix or 'config'}: {detail}")
    return lines


class StrictSerializer(serializers.Serializer):
    """
    Rejects keys it does not declare; nested sections listed in ``sections``
    default to an empty object so their own field defaults apply.
    """

    sections = ()

    def to_internal_value(self, data):
        if not isinstance(data, dict):
            raise serializers.ValidationError({'non_field_errors': ['Expected a JSON object.']})
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: ['Unknown key.'] for key in unknown})
        data = {**{name: {} for name in self.sections}, **data}
        return super().to_internal_value(data)


class CodeSourceSerializer(StrictSerializer):
    """Either a shipped fixture or an ALIST file (relative to the config file)."""

    fixture = serializers.ChoiceField(choices=sorted(FIXTURES), required=False)
    alist = serializers.CharField(required=False)
    d_min = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)

    def validate(self, attrs):
        if ('fixture' in attrs) == ('alist' in attrs):
            raise serializers.ValidationError("Give exactly one of 'fixture' or 'alist'.")
        return attrs


class SnrRangeSerializer(StrictSerializer):
    start = serializers.FloatField()
    stop = serializers.FloatField()
    step = serializers.FloatField(min_value=1e-9)

    def validate(self, attrs):
        if attrs['stop'] < attrs['start']:
            raise serializers.ValidationError({'stop': ['Must not be below start.']})
        return attrs


class DecoderSerializer(StrictSerializer):
    iterations = serializers.IntegerField(min_value=1, default=_project('ITERATIONS'))
    clip = serializers.FloatField(min_value=1e-9, default=_project('MESSAGE_CLIP'))


class ShellSerializer(StrictSerializer):
    count = serializers.IntegerField(min_value=2, default=100)
    gamma = serializers.FloatField(min_value=1e-12, max_value=1.0, default=0.7)
    epsilon_tail = serializers.FloatField(default=_project('EPSILON_TAIL'))
    tail_extend = serializers.IntegerField(min_value=0, default=_project('TAIL_EXTEND'))

    def validate_epsilon_tail(self, value):
        if not 0.0 < value < 0.1:
            raise serializers.ValidationError("Must lie in (0, 0.1).")
        return value


class LearningRateSerializer(StrictSerializer):
    initial = serializers.FloatField(min_value=1e-12, default=0.01)
    drop_to = serializers.FloatField(min_value=1e-12, required=False, allow_null=True, default=None)
    drop_at_fraction = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.5)


class RmspropSerializer(StrictSerializer):
    decay = serializers.FloatField(default=_project('RMSPROP_DECAY'))
    epsilon = serializers.FloatField(min_value=1e-300, default=_project('RMSPROP_EPSILON'))

    def validate_decay(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("Must lie in (0, 1).")
        return value


class TrainingSerializer(StrictSerializer):
    sections = ('learning_rate', 'rmsprop')

    batch_size = serializers.IntegerField(min_value=1, default=512)
    batches_per_epoch = serializers.IntegerField(min_value=1, default=31)
    epochs_per_outer = serializers.IntegerField(min_value=1, default=20)
    max_outer_iters = serializers.IntegerField(min_value=0, default=5)
    theta_test_samples = serializers.IntegerField(min_value=1, default=20000)
    validation_samples = serializers.IntegerField(min_value=1, default=4000)
    patience = serializers.IntegerField(min_value=1, default=2)
    target_loss = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)
    freeze_theta = serializers.BooleanField(default=False)
    learning_rate = LearningRateSerializer()
    rmsprop = RmspropSerializer()


class RunConfigSerializer(StrictSerializer):
    """
    The run-config document.

    ``snr_range_db`` is expanded into ``snr_list_db``; the validated data
    always carries the explicit list.
    """

    sections = ('decoder', 'shells', 'training')

    code = CodeSourceSerializer()
    snr_list_db = serializers.ListField(child=serializers.FloatField(), allow_empty=False, required=False)
    snr_range_db = SnrRangeSerializer(required=False)
    decoder = DecoderSerializer()
    shells = ShellSerializer()
    training = TrainingSerializer()
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, default=0)

    def validate(self, attrs):
        if ('snr_list_db' in attrs) == ('snr_range_db' in attrs):
            raise serializers.ValidationError("Give exactly one of 'snr_list_db' or 'snr_range_db'.")
        if 'snr_range_db' in attrs:
            grid = attrs.pop('snr_range_db')
            attrs['snr_list_db'] = snr_grid(grid['start'], grid['stop'], grid['step'])
        return attrs


class RunManifestSerializer(StrictSerializer):
    """Everything needed to reproduce a training run."""

    config = RunConfigSerializer()
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1)
    version = serializers.CharField()
    created = serializers.CharField()
    input_digests = serializers.DictField(child=serializers.CharField())

    def validate(self, attrs):
        if attrs['seed'] != attrs['config']['seed']:
            raise serializers.ValidationError({'seed': ['Does not match config.seed.']})
        return attrs
